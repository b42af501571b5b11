#include "qshare/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qshare {

namespace {

constexpr double kLeakageThreshold = 3.0;
constexpr double kHandoffClamp = 0.999;

Vec collect(const std::vector<IbrParams>& ibrs, double (*get)(const IbrParams&)) {
    Vec out(static_cast<Eigen::Index>(ibrs.size()));
    for (std::size_t i = 0; i < ibrs.size(); ++i) out(static_cast<Eigen::Index>(i)) = get(ibrs[i]);
    return out;
}

}  // namespace

Vec ControllerParams::s_rated() const {
    return collect(ibrs, [](const IbrParams& p) { return p.s_rated; });
}
Vec ControllerParams::m_omega() const {
    return collect(ibrs, [](const IbrParams& p) { return p.m_omega; });
}
Vec ControllerParams::v_star() const {
    return collect(ibrs, [](const IbrParams& p) { return p.v_star(); });
}
Vec ControllerParams::delta() const {
    return collect(ibrs, [](const IbrParams& p) { return p.delta(); });
}

std::vector<std::string> ControllerParams::check() const {
    std::vector<std::string> errs;
    for (std::size_t i = 0; i < ibrs.size(); ++i) {
        const auto& p = ibrs[i];
        const std::string who = "IBR " + std::to_string(i + 1);
        if (!(p.s_rated > 0.0)) errs.push_back(who + ": S_rated must be positive");
        if (!(p.v_min < p.v_max)) errs.push_back(who + ": V_min must be below V_max");
        if (p.m_omega < 0.0) errs.push_back(who + ": m_omega must be nonnegative");
        if (p.m_v < 0.0) errs.push_back(who + ": m_V must be nonnegative");
    }
    const auto& g = gains;
    if (!(g.tau_omega > 0.0)) errs.push_back("gains: tau_omega must be positive");
    if (!(g.tau_v > 0.0)) errs.push_back("gains: tau_v must be positive");
    if (!(g.tau_p > 0.0)) errs.push_back("gains: tau_p must be positive");
    if (!(g.tau_d > 0.0)) errs.push_back("gains: tau_d must be positive");
    if (!(g.beta >= 0.0)) errs.push_back("gains: beta must be nonnegative");
    if (!(g.k > 0.0)) errs.push_back("gains: k must be positive");
    return errs;
}

std::string to_string(ControlMode mode) { return mode == ControlMode::Droop ? "droop" : "proposed"; }

double voltage_output(const IbrParams& p, double v) {
    const double d = p.delta();
    return p.v_star() + d * std::tanh(v / d);
}

double voltage_output_slope(const IbrParams& p, double v) {
    const double t = std::tanh(v / p.delta());
    return 1.0 - t * t;
}

double leakage(const IbrParams& p, double v) {
    const double d = p.delta();
    if (std::abs(v) > kLeakageThreshold * d) return std::abs(v / d) - kLeakageThreshold;
    return 0.0;
}

double leakage_term_slope(const IbrParams& p, double v) {
    // d/dv[(|v|/D - 3) v] = 2|v|/D - 3 outside the dead band.
    const double d = p.delta();
    if (std::abs(v) >= kLeakageThreshold * d) return 2.0 * std::abs(v) / d - kLeakageThreshold;
    return 0.0;
}

double integrator_rhs(const IbrParams& p, double beta, double v, double lambda, double Q) {
    const double d = p.delta();
    return p.v_star() * (lambda - Q / p.s_rated) - beta * d * std::tanh(v / d) - leakage(p, v) * v;
}

DroopRates droop_rhs(const IbrParams& p, double Omega, double v, double P, double Q) {
    return {-Omega - p.m_omega * P / p.s_rated, -v - p.m_v * Q / p.s_rated};
}

PrimalDualRates primal_dual_rhs(const CommGraph& g, double k, const Vec& lambda, const Vec& zeta, const Vec& q_ratio) {
    const auto n = static_cast<Eigen::Index>(g.size());
    if (lambda.size() != n || zeta.size() != n || q_ratio.size() != n)
        throw ModelError("primal_dual_rhs: dimension mismatch with the communication graph");
    const Mat l = laplacian(g);
    const Vec l_lambda = l * lambda;
    return {q_ratio - lambda - l * zeta - k * l_lambda, l_lambda};
}

KktResidual kkt_residual(const CommGraph& g, double k, const Vec& lambda, const Vec& zeta, const Vec& q_ratio) {
    const auto n = static_cast<Eigen::Index>(g.size());
    if (lambda.size() != n || zeta.size() != n || q_ratio.size() != n)
        throw ModelError("kkt_residual: dimension mismatch with the communication graph");
    const Mat l = laplacian(g);
    const Vec l_lambda = l * lambda;
    return {lambda - q_ratio + l * zeta + k * l_lambda, l_lambda};
}

double integrator_state_for_voltage(const IbrParams& p, double V) {
    const double d = p.delta();
    const double x = std::clamp((V - p.v_star()) / d, -kHandoffClamp, kHandoffClamp);
    return d * std::atanh(x);
}

}  // namespace qshare
