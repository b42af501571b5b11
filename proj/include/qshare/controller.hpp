#pragma once

#include "qshare/common.hpp"
#include "qshare/graph.hpp"

#include <string>
#include <utility>
#include <vector>

namespace qshare {

/// Per-IBR ratings, droop gains and voltage limits (per unit; m_omega in rad/s per p.u.).
struct IbrParams {
    double s_rated = 1.0;
    double m_omega = 0.0;
    double m_v = 0.0;
    double v_min = 0.95;
    double v_max = 1.05;

    double v_star() const noexcept { return 0.5 * (v_max + v_min); }
    double delta() const noexcept { return 0.5 * (v_max - v_min); }

    bool operator==(const IbrParams&) const = default;
};

/// Gains shared by every IBR.
struct ControlGains {
    double tau_omega = 0.1;
    double tau_v = 1.0;
    double tau_p = 0.01;
    double tau_d = 0.1;
    double beta = 0.01;
    double k = 1.0;

    bool operator==(const ControlGains&) const = default;
};

struct ControllerParams {
    std::vector<IbrParams> ibrs;
    ControlGains gains;

    std::size_t size() const noexcept { return ibrs.size(); }

    Vec s_rated() const;
    Vec m_omega() const;
    Vec v_star() const;
    Vec delta() const;

    /// Every violated parameter invariant, one message each.
    std::vector<std::string> check() const;

    bool operator==(const ControllerParams&) const = default;
};

enum class ControlMode { Droop, Proposed };

std::string to_string(ControlMode mode);

/// V = V* + Delta tanh(v / Delta); strictly inside (V_min, V_max) for finite v.
double voltage_output(const IbrParams& p, double v);

/// dV/dv of voltage_output.
double voltage_output_slope(const IbrParams& p, double v);

/// Leakage coefficient: |v/Delta| - 3 when |v| > 3 Delta, else 0.
double leakage(const IbrParams& p, double v);

/// d(rho(v) v)/dv. At the kink |v| = 3 Delta the outward one-sided value (3) is returned.
double leakage_term_slope(const IbrParams& p, double v);

/// Bracketed right-hand side of the integrator (divide by tau_v):
///   V*(lambda - Q/S) - beta Delta tanh(v/Delta) - rho(v) v
double integrator_rhs(const IbrParams& p, double beta, double v, double lambda, double Q);

struct DroopRates {
    double omega;  // -Omega - m_omega P / S
    double v;      // -v - m_v Q / S
};

/// Legacy droop right-hand sides before division by the time constants.
DroopRates droop_rhs(const IbrParams& p, double Omega, double v, double P, double Q);

struct PrimalDualRates {
    Vec lambda;  // multiply by 1/tau_p
    Vec zeta;    // multiply by 1/tau_d
};

/// Primal-dual optimizer right-hand sides before time-constant scaling:
///   lambda: Q_ratio - lambda - L zeta - k L lambda
///   zeta:   L lambda
PrimalDualRates primal_dual_rhs(const CommGraph& g, double k, const Vec& lambda, const Vec& zeta, const Vec& q_ratio);

struct KktResidual {
    Vec stationarity;  // lambda - Q_ratio + L zeta + k L lambda
    Vec consensus;     // L lambda
};

KktResidual kkt_residual(const CommGraph& g, double k, const Vec& lambda, const Vec& zeta, const Vec& q_ratio);

/// Integrator state reproducing output voltage V, clamped to |tanh| <= 0.999.
double integrator_state_for_voltage(const IbrParams& p, double V);

}  // namespace qshare
