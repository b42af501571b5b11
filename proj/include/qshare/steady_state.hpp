#pragma once

#include "qshare/common.hpp"
#include "qshare/controller.hpp"
#include "qshare/graph.hpp"
#include "qshare/network.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace qshare {

/// Steady state of the closed loop under the proposed controller.
struct Equilibrium {
    Vec theta;   // relative angles, theta(0) = 0
    Vec omega;   // common frequency deviation, Omega_bar = (omega_syn - omega_nom) 1
    Vec v;
    Vec lambda;
    Vec zeta;    // defined up to a uniform shift; 1'zeta pinned by the solver
    Vec V;
    Vec P;
    Vec Q;
    double omega_syn = 0.0;  // rad/s
    double alpha_P = 0.0;
    double alpha_Q = 0.0;
    std::set<int> saturated;  // 1-based IBRs with positive leakage

    int iterations = 0;
    double residual = 0.0;  // infinity norm of the steady-state equations
};

struct EquilibriumGuess {
    Vec theta;   // empty: zeros
    Vec v;       // empty: zeros (V = V*)
    Vec lambda;  // empty: zeros
    Vec zeta;    // empty: zeros
    double omega_dev = 0.0;
};

struct NewtonOptions {
    double tolerance = 1e-12;
    int max_iterations = 60;
    int max_restarts = 8;
    bool finite_difference_jacobian = false;
    double zeta_sum = 0.0;  // value pinned for 1'zeta
    std::uint64_t seed = 12345;
};

/// Residual of the steady-state equations in the reduced unknowns
/// z = [theta_2..theta_n, Omega, v, lambda, zeta]; exposed for tests.
class SteadyStateSystem {
  public:
    SteadyStateSystem(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params, double zeta_sum);

    Eigen::Index size() const noexcept { return 4 * n_; }
    Vec residual(const Vec& z) const;
    Mat jacobian(const Vec& z) const;
    Mat jacobian_fd(const Vec& z, double h = 1e-7) const;

    Vec pack(const EquilibriumGuess& guess) const;
    Equilibrium unpack(const Vec& z, double omega_nom) const;

  private:
    Eigen::Index n_;
    const ReducedNetwork& net_;
    Mat lap_;
    const ControllerParams& params_;
    double zeta_sum_;

    Vec theta_of(const Vec& z) const;
};

/// Newton solve of the steady-state equations with the uniform-angle and uniform-dual
/// degeneracies removed (theta_1 = 0 and 1'zeta = options.zeta_sum).
Equilibrium solve_equilibrium(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                              double omega_nom, const EquilibriumGuess& guess = {}, const NewtonOptions& options = {});

struct PropertyRow {
    std::string property;
    int ibr = 0;  // 0 = network-wide
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct PropertyReport {
    double p_ratio_spread = 0.0;
    double omega_syn_error = 0.0;  // |omega_syn - (omega_nom - m* mean(P/S))|
    bool equal_droop = false;
    bool active_sharing = false;

    double margin_low = 0.0;   // min_i (V_i - V_min,i)
    double margin_high = 0.0;  // min_i (V_max,i - V_i)
    bool containment = false;

    bool global_sharing = false;   // unsaturated rows within the beta bound
    bool partial_sharing = false;  // saturated rows within the leakage-widened bound

    Vec sharing_error;  // |Q_i/S_i - alpha_Q|

    std::vector<PropertyRow> rows;

    bool all_pass() const { return active_sharing && containment && global_sharing && partial_sharing; }
};

PropertyReport verify_properties(const Equilibrium& eq, const ControllerParams& params, double omega_nom,
                                 double tol = 1e-8);

std::string format_report(const Equilibrium& eq, const PropertyReport& rep);
std::string format_report_csv(const PropertyReport& rep);

}  // namespace qshare
