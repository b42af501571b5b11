#include "qshare/network.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

namespace qshare {

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::IbrTerminal: return "ibr-terminal";
        case BusKind::Load: return "load";
        case BusKind::Junction: return "junction";
    }
    return "load";
}

BusKind bus_kind_from_string(const std::string& s) {
    if (s == "ibr-terminal") return BusKind::IbrTerminal;
    if (s == "load") return BusKind::Load;
    if (s == "junction") return BusKind::Junction;
    throw ModelError("unknown bus type '" + s + "' (expected ibr-terminal, load or junction)");
}

double Bases::omega_nom() const { return 2.0 * std::numbers::pi * f_nom_hz; }

std::size_t NetworkData::bus_position(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return i;
    return npos;
}

std::vector<std::string> NetworkData::check() const {
    std::vector<std::string> errs;
    auto fail = [&](const std::string& s) { errs.push_back(s); };

    if (!(bases.s_base_va > 0.0)) fail("bases: S_base must be positive");
    if (!(bases.v_base_v > 0.0)) fail("bases: V_base must be positive");
    if (!(bases.f_nom_hz > 0.0)) fail("bases: f_nom must be positive");
    if (bases.phases != 1 && bases.phases != 3) fail("bases: phases must be 1 or 3");

    std::set<int> ids;
    for (const auto& b : buses)
        if (!ids.insert(b.id).second) fail("buses: duplicate bus " + std::to_string(b.id));

    auto check_impedance = [&](const std::string& what, double r, double x) {
        if (r < 0.0) fail(what + ": negative resistance");
        if (r == 0.0 && x == 0.0) fail(what + ": zero impedance");
    };

    for (const auto& l : lines) {
        const std::string what = "line (" + std::to_string(l.from) + ", " + std::to_string(l.to) + ")";
        if (!ids.contains(l.from)) fail(what + ": unknown bus " + std::to_string(l.from));
        if (!ids.contains(l.to)) fail(what + ": unknown bus " + std::to_string(l.to));
        if (l.from == l.to) fail(what + ": both ends on the same bus");
        check_impedance(what, l.r, l.x);
    }

    std::set<int> ibrs;
    for (const auto& c : connectors) {
        const std::string what = "connector of IBR " + std::to_string(c.ibr);
        if (!ibrs.insert(c.ibr).second) fail(what + ": duplicate IBR");
        if (!ids.contains(c.bus)) fail(what + ": unknown bus " + std::to_string(c.bus));
        check_impedance(what, c.r, c.x);
    }
    for (std::size_t i = 1; i <= connectors.size(); ++i)
        if (!ibrs.contains(static_cast<int>(i))) fail("connectors: IBR " + std::to_string(i) + " has no connector (IBRs must be numbered 1..n)");
    if (connectors.empty()) fail("connectors: at least one IBR is required");

    std::set<int> load_buses;
    for (const auto& ld : loads) {
        const std::string what = "load at bus " + std::to_string(ld.bus);
        if (!ids.contains(ld.bus)) fail(what + ": unknown bus");
        if (!load_buses.insert(ld.bus).second) fail(what + ": duplicate load");
        if (ld.s < 0.0) fail(what + ": negative apparent power");
        if (!(ld.pf > 0.0 && ld.pf <= 1.0)) fail(what + ": power factor must lie in (0, 1]");
    }

    if (!errs.empty()) return errs;

    // Connectivity of buses + IBR internal nodes.
    const std::size_t nb = buses.size();
    const std::size_t n = connectors.size() + nb;
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& l : lines) {
        const auto a = connectors.size() + bus_position(l.from);
        const auto b = connectors.size() + bus_position(l.to);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (const auto& c : connectors) {
        const auto a = static_cast<std::size_t>(c.ibr - 1);
        const auto b = connectors.size() + bus_position(c.bus);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
        auto i = q.front();
        q.pop();
        for (auto j : adj[i])
            if (!seen[j]) {
                seen[j] = true;
                q.push(j);
            }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (seen[i]) continue;
        if (i < connectors.size())
            fail("electrical network disconnected: IBR " + std::to_string(i + 1) + " unreachable");
        else
            fail("electrical network disconnected: bus " + std::to_string(buses[i - connectors.size()].id) + " unreachable");
    }
    return errs;
}

NetworkData to_per_unit(const NetworkData& data) {
    if (!(data.bases.s_base_va > 0.0) || !(data.bases.v_base_v > 0.0) || data.bases.phases < 1)
        throw ModelError("per-unit conversion needs positive S_base and V_base");
    NetworkData out = data;
    const double zb = data.bases.z_base();
    if (out.line_unit == ImpedanceUnit::Ohm) {
        for (auto& l : out.lines) {
            l.r /= zb;
            l.x /= zb;
        }
        out.line_unit = ImpedanceUnit::PerUnit;
    }
    if (out.connector_unit == ImpedanceUnit::Ohm) {
        for (auto& c : out.connectors) {
            c.r /= zb;
            c.x /= zb;
        }
        out.connector_unit = ImpedanceUnit::PerUnit;
    }
    if (out.load_unit == PowerUnit::VoltAmpere) {
        for (auto& ld : out.loads) ld.s /= data.bases.s_base_va;
        out.load_unit = PowerUnit::PerUnit;
    }
    return out;
}

CMat ReducedNetwork::admittance() const {
    CMat y(G.rows(), G.cols());
    y.real() = G;
    y.imag() = B;
    return y;
}

namespace {

using cd = std::complex<double>;

void require_per_unit(const NetworkData& data) {
    if (data.line_unit != ImpedanceUnit::PerUnit || data.connector_unit != ImpedanceUnit::PerUnit ||
        data.load_unit != PowerUnit::PerUnit)
        throw ModelError("network data must be converted to per unit before admittance assembly");
}

void stamp_series(CMat& y, Eigen::Index a, Eigen::Index b, double r, double x) {
    const cd ys = 1.0 / cd(r, x);
    y(a, a) += ys;
    y(b, b) += ys;
    y(a, b) -= ys;
    y(b, a) -= ys;
}

}  // namespace

CMat nodal_admittance(const NetworkData& data, const Vec& load_scale) {
    require_per_unit(data);
    const auto n_ibr = static_cast<Eigen::Index>(data.ibr_count());
    const auto nb = static_cast<Eigen::Index>(data.buses.size());
    if (load_scale.size() != nb) throw ModelError("load_scale must have one entry per bus");

    CMat y = CMat::Zero(n_ibr + nb, n_ibr + nb);
    for (const auto& l : data.lines) {
        const auto a = n_ibr + static_cast<Eigen::Index>(data.bus_position(l.from));
        const auto b = n_ibr + static_cast<Eigen::Index>(data.bus_position(l.to));
        stamp_series(y, a, b, l.r, l.x);
    }
    for (const auto& c : data.connectors) {
        const auto a = static_cast<Eigen::Index>(c.ibr - 1);
        const auto b = n_ibr + static_cast<Eigen::Index>(data.bus_position(c.bus));
        stamp_series(y, a, b, c.r, c.x);
    }
    // y_load = S (pf - j sin(acos pf)) / V_nom^2 with V_nom = 1 p.u.
    for (const auto& ld : data.loads) {
        const auto pos = static_cast<Eigen::Index>(data.bus_position(ld.bus));
        const double p = ld.s * ld.pf;
        const double q = ld.s * std::sin(std::acos(ld.pf));
        y(n_ibr + pos, n_ibr + pos) += load_scale(pos) * cd(p, -q);
    }
    return y;
}

CMat schur_reduce(const CMat& y, Eigen::Index keep) {
    const auto n = y.rows();
    const auto ne = n - keep;
    if (ne == 0) return y;
    const CMat ykk = y.topLeftCorner(keep, keep);
    const CMat yke = y.topRightCorner(keep, ne);
    const CMat yek = y.bottomLeftCorner(ne, keep);
    const CMat yee = y.bottomRightCorner(ne, ne);
    Eigen::FullPivLU<CMat> lu(yee);
    if (!lu.isInvertible()) throw ModelError("Kron reduction: eliminated block is singular");
    return ykk - yke * lu.solve(yek);
}

ReducedNetwork kron_reduce(const NetworkData& data, const Vec& load_scale) {
    if (auto errs = data.check(); !errs.empty()) {
        std::ostringstream os;
        os << "invalid network:";
        for (const auto& e : errs) os << "\n  " << e;
        throw ModelError(os.str());
    }
    const CMat y = nodal_admittance(data, load_scale);
    const auto n_ibr = static_cast<Eigen::Index>(data.ibr_count());

    const auto ne = y.rows() - n_ibr;
    if (ne > 0) {
        Eigen::FullPivLU<CMat> lu(y.bottomRightCorner(ne, ne));
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) {
            // Name buses participating in the null space.
            const CMat ker = lu.kernel();
            std::ostringstream os;
            os << "Kron reduction: singular eliminated block (isolated bus island) involving buses:";
            for (Eigen::Index i = 0; i < ne; ++i)
                if (ker.row(i).norm() > 1e-9) os << ' ' << data.buses[static_cast<std::size_t>(i)].id;
            throw ModelError(os.str());
        }
    }

    const CMat yr = schur_reduce(y, n_ibr);
    ReducedNetwork out;
    out.G = yr.real();
    out.B = yr.imag();
    // Reciprocal network: symmetrize round-off.
    out.G = 0.5 * (out.G + out.G.transpose()).eval();
    out.B = 0.5 * (out.B + out.B.transpose()).eval();
    return out;
}

ReducedNetwork kron_reduce(const NetworkData& data) {
    return kron_reduce(data, Vec::Ones(static_cast<Eigen::Index>(data.buses.size())));
}

PowerInjection power_flow(const ReducedNetwork& net, const Vec& theta, const Vec& V) {
    const auto n = net.G.rows();
    if (theta.size() != n || V.size() != n) throw ModelError("power_flow: dimension mismatch");
    PowerInjection out{Vec::Zero(n), Vec::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 0.0;
        double q = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double th = theta(i) - theta(j);
            const double c = std::cos(th);
            const double s = std::sin(th);
            p += V(j) * (net.G(i, j) * c + net.B(i, j) * s);
            q += V(j) * (net.G(i, j) * s - net.B(i, j) * c);
        }
        out.P(i) = V(i) * p;
        out.Q(i) = V(i) * q;
    }
    return out;
}

PowerInjection LinearizedModel::evaluate(const Vec& theta, const Vec& V) const {
    return {J_theta_P * theta + J_V_P * V + w_P, J_theta_Q * theta + J_V_Q * V + w_Q};
}

LinearizedModel jacobians(const ReducedNetwork& net, const Vec& theta0, const Vec& V0) {
    const auto n = net.G.rows();
    const auto pq = power_flow(net, theta0, V0);
    LinearizedModel lin;
    lin.J_theta_P = Mat::Zero(n, n);
    lin.J_V_P = Mat::Zero(n, n);
    lin.J_theta_Q = Mat::Zero(n, n);
    lin.J_V_Q = Mat::Zero(n, n);
    const Mat& G = net.G;
    const Mat& B = net.B;

    for (Eigen::Index i = 0; i < n; ++i) {
        double sum_a = 0.0;
        double sum_b = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double th = theta0(i) - theta0(j);
            const double c = std::cos(th);
            const double s = std::sin(th);
            const double a = G(i, j) * c + B(i, j) * s;  // P-like term
            const double b = G(i, j) * s - B(i, j) * c;  // Q-like term
            lin.J_theta_P(i, j) = V0(i) * V0(j) * b;
            lin.J_theta_Q(i, j) = -V0(i) * V0(j) * a;
            lin.J_V_P(i, j) = V0(i) * a;
            lin.J_V_Q(i, j) = V0(i) * b;
            sum_a += V0(j) * a;
            sum_b += V0(j) * b;
        }
        const double vi = V0(i);
        lin.J_theta_P(i, i) = -pq.Q(i) - B(i, i) * vi * vi;
        lin.J_theta_Q(i, i) = pq.P(i) - G(i, i) * vi * vi;
        lin.J_V_P(i, i) = sum_a + 2.0 * G(i, i) * vi;
        lin.J_V_Q(i, i) = sum_b - 2.0 * B(i, i) * vi;
    }

    lin.w_P = pq.P - lin.J_theta_P * theta0 - lin.J_V_P * V0;
    lin.w_Q = pq.Q - lin.J_theta_Q * theta0 - lin.J_V_Q * V0;
    lin.theta0 = theta0;
    lin.V0 = V0;
    return lin;
}

}  // namespace qshare
