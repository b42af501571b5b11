#include "qshare/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace qshare {

SteadyStateSystem::SteadyStateSystem(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                                     double zeta_sum)
    : n_(static_cast<Eigen::Index>(params.size())), net_(net), lap_(laplacian(g)), params_(params), zeta_sum_(zeta_sum) {
    if (net.size() != params.size() || g.size() != params.size())
        throw ModelError("steady state: inconsistent IBR counts");
    if (n_ < 1) throw ModelError("steady state: no IBRs");
}

// Layout: [theta_2..theta_n | Omega | v (n) | lambda (n) | zeta (n)]
Vec SteadyStateSystem::theta_of(const Vec& z) const {
    Vec th = Vec::Zero(n_);
    th.tail(n_ - 1) = z.head(n_ - 1);
    return th;
}

Vec SteadyStateSystem::pack(const EquilibriumGuess& guess) const {
    Vec z = Vec::Zero(4 * n_);
    if (guess.theta.size() == n_) z.head(n_ - 1) = guess.theta.tail(n_ - 1).array() - guess.theta(0);
    z(n_ - 1) = guess.omega_dev;
    if (guess.v.size() == n_) z.segment(n_, n_) = guess.v;
    if (guess.lambda.size() == n_) z.segment(2 * n_, n_) = guess.lambda;
    if (guess.zeta.size() == n_) {
        z.segment(3 * n_, n_) = guess.zeta;
    } else {
        z.segment(3 * n_, n_).setConstant(zeta_sum_ / static_cast<double>(n_));
    }
    return z;
}

Vec SteadyStateSystem::residual(const Vec& z) const {
    const auto n = n_;
    const Vec theta = theta_of(z);
    const double omega = z(n - 1);
    const auto v = z.segment(n, n);
    const auto lambda = z.segment(2 * n, n);
    const auto zeta = z.segment(3 * n, n);

    Vec V(n);
    for (Eigen::Index i = 0; i < n; ++i) V(i) = voltage_output(params_.ibrs[static_cast<std::size_t>(i)], v(i));
    const auto pq = power_flow(net_, theta, V);
    const Vec s = params_.s_rated();
    const double beta = params_.gains.beta;
    const double k = params_.gains.k;

    Vec r(4 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params_.ibrs[static_cast<std::size_t>(i)];
        r(i) = -omega - p.m_omega * pq.P(i) / p.s_rated;
        r(n + i) = integrator_rhs(p, beta, v(i), lambda(i), pq.Q(i));
    }
    const Vec q_ratio = pq.Q.array() / s.array();
    r.segment(2 * n, n) = q_ratio - lambda - lap_ * zeta - k * (lap_ * lambda);
    const Vec l_lambda = lap_ * lambda;
    r.segment(3 * n, n - 1) = l_lambda.head(n - 1);
    r(4 * n - 1) = zeta.sum() - zeta_sum_;
    return r;
}

Mat SteadyStateSystem::jacobian(const Vec& z) const {
    const auto n = n_;
    const Vec theta = theta_of(z);
    const auto v = z.segment(n, n);
    Vec V(n), h(n), dleak(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params_.ibrs[static_cast<std::size_t>(i)];
        V(i) = voltage_output(p, v(i));
        h(i) = voltage_output_slope(p, v(i));
        dleak(i) = leakage_term_slope(p, v(i));
    }
    const auto lin = jacobians(net_, theta, V);
    const double beta = params_.gains.beta;
    const double k = params_.gains.k;

    Mat J = Mat::Zero(4 * n, 4 * n);
    // theta_1 is anchored: drop its column.
    const Mat dP_dth = lin.J_theta_P.rightCols(n - 1);
    const Mat dQ_dth = lin.J_theta_Q.rightCols(n - 1);
    const Mat dP_dv = lin.J_V_P * h.asDiagonal();
    const Mat dQ_dv = lin.J_V_Q * h.asDiagonal();

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params_.ibrs[static_cast<std::size_t>(i)];
        const double ms = p.m_omega / p.s_rated;
        const double vs = p.v_star() / p.s_rated;
        // Frequency rows.
        J.block(i, 0, 1, n - 1) = -ms * dP_dth.row(i);
        J(i, n - 1) = -1.0;
        J.block(i, n, 1, n) = -ms * dP_dv.row(i);
        // Integrator rows.
        J.block(n + i, 0, 1, n - 1) = -vs * dQ_dth.row(i);
        J.block(n + i, n, 1, n) = -vs * dQ_dv.row(i);
        J(n + i, n + i) += -beta * h(i) - dleak(i);
        J(n + i, 2 * n + i) = p.v_star();
        // Primal rows (Q/S part).
        J.block(2 * n + i, 0, 1, n - 1) = dQ_dth.row(i) / p.s_rated;
        J.block(2 * n + i, n, 1, n) = dQ_dv.row(i) / p.s_rated;
    }
    J.block(2 * n, 2 * n, n, n) = -Mat::Identity(n, n) - k * lap_;
    J.block(2 * n, 3 * n, n, n) = -lap_;
    J.block(3 * n, 2 * n, n - 1, n) = lap_.topRows(n - 1);
    J.block(4 * n - 1, 3 * n, 1, n).setOnes();
    return J;
}

Mat SteadyStateSystem::jacobian_fd(const Vec& z, double h) const {
    const auto m = z.size();
    Mat J(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        Vec zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        J.col(j) = (residual(zp) - residual(zm)) / (2.0 * h);
    }
    return J;
}

Equilibrium SteadyStateSystem::unpack(const Vec& z, double omega_nom) const {
    const auto n = n_;
    Equilibrium eq;
    eq.theta = theta_of(z);
    eq.omega = Vec::Constant(n, z(n - 1));
    eq.v = z.segment(n, n);
    eq.lambda = z.segment(2 * n, n);
    eq.zeta = z.segment(3 * n, n);
    eq.V.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params_.ibrs[static_cast<std::size_t>(i)];
        eq.V(i) = voltage_output(p, eq.v(i));
        if (leakage(p, eq.v(i)) > 0.0) eq.saturated.insert(static_cast<int>(i) + 1);
    }
    const auto pq = power_flow(net_, eq.theta, eq.V);
    eq.P = pq.P;
    eq.Q = pq.Q;
    const Vec s = params_.s_rated();
    eq.omega_syn = omega_nom + z(n - 1);
    eq.alpha_P = (eq.P.array() / s.array()).mean();
    eq.alpha_Q = (eq.Q.array() / s.array()).mean();
    return eq;
}

Equilibrium solve_equilibrium(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                              double omega_nom, const EquilibriumGuess& guess, const NewtonOptions& opt) {
    if (auto errs = params.check(); !errs.empty()) throw ModelError("steady state: invalid parameters: " + errs.front());
    SteadyStateSystem sys(net, g, params, opt.zeta_sum);
    const Vec z0 = sys.pack(guess);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Vec best_z = z0;
    double best_res = sys.residual(z0).lpNorm<Eigen::Infinity>();
    int total_iterations = 0;

    for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
        Vec z = z0;
        if (attempt > 0) {
            // Perturb integrator states and angles around the best point seen so far.
            z = best_z;
            const double scale = 0.5 * std::pow(1.5, attempt - 1);
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += 0.01 * scale * gauss(rng);
        }
        Vec r = sys.residual(z);
        double res = r.lpNorm<Eigen::Infinity>();
        int stagnant = 0;
        for (int it = 0; it < opt.max_iterations; ++it) {
            ++total_iterations;
            if (res <= opt.tolerance) break;
            const Mat J = opt.finite_difference_jacobian ? sys.jacobian_fd(z) : sys.jacobian(z);
            Eigen::FullPivLU<Mat> lu(J);
            if (!lu.isInvertible()) {
                if (attempt == opt.max_restarts) throw ConvergenceError("steady state: singular Newton Jacobian", res);
                break;
            }
            const Vec dz = lu.solve(-r);
            // Backtracking on the residual norm.
            double step = 1.0;
            Vec z_new;
            Vec r_new;
            double res_new = res;
            for (int ls = 0; ls < 30; ++ls) {
                z_new = z + step * dz;
                r_new = sys.residual(z_new);
                res_new = r_new.lpNorm<Eigen::Infinity>();
                if (std::isfinite(res_new) && res_new < (1.0 - 1e-4 * step) * res) break;
                step *= 0.5;
            }
            if (!(res_new < res)) {
                ++stagnant;
                if (stagnant > 2) break;
                // Accept a full step anyway to escape a kink of the leakage term.
                z_new = z + dz;
                r_new = sys.residual(z_new);
                res_new = r_new.lpNorm<Eigen::Infinity>();
                if (!std::isfinite(res_new)) break;
            } else {
                stagnant = 0;
            }
            z = z_new;
            r = r_new;
            res = res_new;
        }
        if (res < best_res) {
            best_res = res;
            best_z = z;
        }
        if (res <= opt.tolerance) {
            Equilibrium eq = sys.unpack(z, omega_nom);
            eq.iterations = total_iterations;
            eq.residual = res;
            return eq;
        }
    }
    std::ostringstream os;
    os << "steady state: Newton did not converge after " << total_iterations << " iterations (best residual "
       << best_res << ")";
    throw ConvergenceError(os.str(), best_res);
}

PropertyReport verify_properties(const Equilibrium& eq, const ControllerParams& params, double omega_nom, double tol) {
    const auto n = eq.V.size();
    PropertyReport rep;
    const Vec s = params.s_rated();
    const Vec p_ratio = eq.P.array() / s.array();
    const Vec q_ratio = eq.Q.array() / s.array();
    const double beta = params.gains.beta;

    rep.p_ratio_spread = p_ratio.maxCoeff() - p_ratio.minCoeff();
    const Vec m = params.m_omega();
    rep.equal_droop = (m.array() == m(0)).all();
    if (rep.equal_droop) {
        rep.omega_syn_error = std::abs(eq.omega_syn - (omega_nom - m(0) * p_ratio.mean()));
        rep.active_sharing = rep.p_ratio_spread <= tol && rep.omega_syn_error <= tol;
    } else {
        rep.active_sharing = true;  // the active-sharing check only applies to equal frequency droop
    }
    rep.rows.push_back({"active_sharing_spread", 0, rep.p_ratio_spread, tol, rep.p_ratio_spread <= tol || !rep.equal_droop});
    rep.rows.push_back({"omega_syn_error", 0, rep.omega_syn_error, tol, rep.omega_syn_error <= tol || !rep.equal_droop});

    rep.margin_low = std::numeric_limits<double>::infinity();
    rep.margin_high = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params.ibrs[static_cast<std::size_t>(i)];
        const double lo = eq.V(i) - p.v_min;
        const double hi = p.v_max - eq.V(i);
        rep.margin_low = std::min(rep.margin_low, lo);
        rep.margin_high = std::min(rep.margin_high, hi);
        rep.rows.push_back({"containment_margin", static_cast<int>(i) + 1, std::min(lo, hi), 0.0, lo > 0.0 && hi > 0.0});
    }
    rep.containment = rep.margin_low > 0.0 && rep.margin_high > 0.0;

    rep.sharing_error = (q_ratio.array() - eq.alpha_Q).abs().matrix();
    rep.global_sharing = true;
    rep.partial_sharing = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params.ibrs[static_cast<std::size_t>(i)];
        const int ibr = static_cast<int>(i) + 1;
        const double err = rep.sharing_error(i);
        const double damping = beta * std::abs(1.0 - eq.V(i) / p.v_star());
        if (!eq.saturated.contains(ibr)) {
            const double gap = std::abs(err - damping);
            const bool ok = gap <= tol;
            rep.global_sharing = rep.global_sharing && ok;
            rep.rows.push_back({"sharing_identity_gap", ibr, gap, tol, ok});
        } else {
            const double bound = damping + leakage(p, eq.v(i)) * std::abs(eq.v(i) / p.v_star()) + tol;
            const bool ok = err <= bound;
            rep.partial_sharing = rep.partial_sharing && ok;
            rep.rows.push_back({"saturated_sharing_error", ibr, err, bound, ok});
        }
    }
    return rep;
}

std::string format_report(const Equilibrium& eq, const PropertyReport& rep) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "equilibrium\n";
    os << "  newton iterations: " << eq.iterations << "\n";
    os << "  residual (inf-norm): " << eq.residual << "\n";
    os << "  omega_syn [rad/s]: " << eq.omega_syn << "\n";
    os << "  alpha_P: " << eq.alpha_P << "\n";
    os << "  alpha_Q: " << eq.alpha_Q << "\n";
    os << "  saturated IBRs:";
    if (eq.saturated.empty()) os << " none";
    for (int i : eq.saturated) os << ' ' << i;
    os << "\n";
    os << "  ibr" << std::setw(18) << "theta" << std::setw(18) << "V" << std::setw(18) << "P" << std::setw(18) << "Q"
       << std::setw(18) << "lambda" << std::setw(18) << "v" << "\n";
    for (Eigen::Index i = 0; i < eq.V.size(); ++i) {
        os << "  " << std::setw(3) << i + 1;
        for (double x : {eq.theta(i), eq.V(i), eq.P(i), eq.Q(i), eq.lambda(i), eq.v(i)}) os << ' ' << std::setw(17) << x;
        os << "\n";
    }
    auto verdict = [](bool b) { return b ? "PASS" : "FAIL"; };
    os << "properties\n";
    os << "  1 active power sharing: " << verdict(rep.active_sharing) << " (spread " << rep.p_ratio_spread
       << ", omega_syn error " << rep.omega_syn_error << ")\n";
    os << "  2 voltage containment: " << verdict(rep.containment) << " (low margin " << rep.margin_low
       << ", high margin " << rep.margin_high << ")\n";
    os << "  3 global reactive sharing (unsaturated): " << verdict(rep.global_sharing) << "\n";
    os << "  4 partial reactive sharing (saturated): " << verdict(rep.partial_sharing) << "\n";
    return os.str();
}

std::string format_report_csv(const PropertyReport& rep) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "property,ibr,value,bound,pass\n";
    for (const auto& r : rep.rows)
        os << r.property << ',' << r.ibr << ',' << r.value << ',' << r.bound << ',' << (r.pass ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace qshare
