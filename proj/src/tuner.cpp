#include "qshare/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qshare {

namespace {

constexpr double kRatio = 10.0;
constexpr double kBoundaryTol = 1e-12;  // relative slack so exact 10x boundaries pass
constexpr int kMaxHalvings = 60;

bool at_least(double value, double bound) { return value >= bound * (1.0 - kBoundaryTol); }
bool at_most(double value, double bound) { return value <= bound * (1.0 + kBoundaryTol); }

}  // namespace

std::vector<std::string> TuningSpec::check() const {
    std::vector<std::string> e;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) e.push_back(std::string(name) + " must be positive");
    };
    positive(delta_f_max_pu, "delta_f_max");
    positive(rocof_star, "rocof_star");
    positive(tau_p, "tau_p");
    positive(k_d, "k_d");
    positive(beta_error_budget, "beta_error_budget");
    positive(beta_cap, "beta_cap");
    if (!(tau_d_floor >= 0.0)) e.push_back("tau_d_floor must be nonnegative");
    return e;
}

TuningResult tune(const TuningSpec& spec, const CommGraph& g, const std::vector<IbrParams>& ibrs, double f_nom_hz) {
    if (auto e = spec.check(); !e.empty()) {
        std::string msg = "invalid tuning spec:";
        for (const auto& s : e) msg += "\n  " + s;
        throw ModelError(msg);
    }
    if (ibrs.size() != g.size()) throw ModelError("tune: graph size does not match the IBR count");
    if (!(f_nom_hz > 0.0)) throw ModelError("tune: nominal frequency must be positive");

    TuningResult r;
    r.params.ibrs = ibrs;
    const double two_pi = 2.0 * std::numbers::pi;
    r.m_star = two_pi * spec.delta_f_max_pu * f_nom_hz;
    for (auto& p : r.params.ibrs) {
        p.m_omega = r.m_star;
        p.m_v = p.delta();
    }

    auto& gn = r.params.gains;
    gn.tau_omega = r.m_star / (two_pi * spec.rocof_star);
    gn.tau_p = spec.tau_p;
    gn.tau_d = std::max(kRatio * spec.tau_p, spec.tau_d_floor);
    gn.tau_v = std::max(kRatio * gn.tau_omega, kRatio * gn.tau_d);
    r.sigma2 = algebraic_connectivity(g);
    gn.k = spec.k_d / r.sigma2;

    auto worst_error = [&](double beta) {
        double w = 0.0;
        for (const auto& p : r.params.ibrs) w = std::max(w, beta * p.delta() / p.v_star());
        return w;
    };
    double beta = spec.beta_cap;
    while (!at_most(worst_error(beta), spec.beta_error_budget)) {
        if (++r.beta_halvings > kMaxHalvings)
            throw ModelError("tune: no beta meets the sharing error budget");
        beta *= 0.5;
    }
    gn.beta = beta;

    if (gn.tau_v < 1.0 || gn.tau_v > 10.0) {
        std::ostringstream os;
        os << "tau_v = " << gn.tau_v << " s is outside the 1 to 10 s voltage response range of IEEE 1547";
        r.warnings.push_back(os.str());
    }
    if (auto e = r.params.check(); !e.empty()) {
        std::string msg = "tune produced invalid parameters:";
        for (const auto& s : e) msg += "\n  " + s;
        throw ModelError(msg);
    }
    return r;
}

bool ValidationReport::pass() const {
    return std::all_of(items.begin(), items.end(), [](const ValidationItem& i) { return i.pass; });
}

std::vector<std::string> ValidationReport::violations() const {
    std::vector<std::string> out;
    for (const auto& i : items) {
        if (i.pass) continue;
        std::ostringstream os;
        os << "rule '" << i.rule << "' violated";
        if (i.ibr > 0) os << " at IBR " << i.ibr;
        os << ": value " << i.value << ", bound " << i.bound;
        out.push_back(os.str());
    }
    return out;
}

ValidationReport validate(const ControllerParams& params, double beta_error_budget) {
    ValidationReport r;
    const auto& g = params.gains;
    const double slow = kRatio * std::max(g.tau_omega, g.tau_d);
    r.items.push_back({"tau_v >= 10 max(tau_Omega, tau_d)", 0, g.tau_v, slow, at_least(g.tau_v, slow)});
    r.items.push_back({"tau_d >= 10 tau_p", 0, g.tau_d, kRatio * g.tau_p, at_least(g.tau_d, kRatio * g.tau_p)});
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params.ibrs[i];
        const double e = g.beta * p.delta() / p.v_star();
        r.items.push_back({"beta Delta / V* <= budget", static_cast<int>(i + 1), e, beta_error_budget,
                           at_most(e, beta_error_budget)});
    }
    return r;
}

std::string format_validation(const ValidationReport& r) {
    std::ostringstream os;
    os << "parameter validation: " << (r.pass() ? "pass" : "FAIL") << "\n";
    for (const auto& i : r.items) {
        os << "  [" << (i.pass ? "ok" : "violated") << "] " << i.rule;
        if (i.ibr > 0) os << " (IBR " << i.ibr << ")";
        os << ": " << i.value << " vs " << i.bound << "\n";
    }
    return os.str();
}

}  // namespace qshare
