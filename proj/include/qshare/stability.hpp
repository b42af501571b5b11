#pragma once

#include "qshare/common.hpp"
#include "qshare/controller.hpp"
#include "qshare/graph.hpp"
#include "qshare/network.hpp"
#include "qshare/steady_state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qshare {

/// Averaging/differencing transform: first row 1'/n, row j+1 = e_{j+1}' - e_j'.
struct Transform {
    Mat T;
    Mat T_inv;
};

Transform transform_matrix(Eigen::Index n);

/// Blocks of the grounded (relative-coordinate) closed loop under the
/// quasi-static frequency and primal filters and a linear power-flow model.
///
///   d r_th / dt        = R_theta r_th + R_thetaV V + d_theta
///   tau_v dv/dt        = R_vtheta r_th + (R_vV - beta I) V + R_vzeta r_z - rho(v) v + d_v
///   eps d r_z / dt     = R_zetatheta r_th + R_zetaV V + R_zeta r_z + d_zeta
///   d theta_av / dt    = R_theta_av r_th + R_thetaV_av V + d_theta_av
///
/// with eps = tau_d / tau_v.
struct ReducedBlocks {
    Mat R_theta, R_thetaV, R_vtheta, R_vV, R_vzeta, R_zetatheta, R_zetaV, R_zeta;
    Vec d_theta, d_v, d_zeta;
    Mat R_theta_av, R_thetaV_av;  // single rows
    double d_theta_av = 0.0;

    // Quasi-steady dual eliminated.
    Mat R_vtheta_new, R_vV_new;
    Vec d_v_new;

    // Transformed matrices whose first columns vanish.
    Mat T_theta_P, T_theta_Q, T_zeta;

    Eigen::Index ibr_count() const noexcept { return R_vV.rows(); }
};

/// Evaluates every block. Throws ModelError if J_theta_P 1 or J_theta_Q 1 exceeds 1e-6.
ReducedBlocks assemble_blocks(const LinearizedModel& lin, const CommGraph& g, const ControllerParams& params,
                              double omega_nom = 0.0);

/// Largest real part of the zero-column structure check |first column| of T J T^{-1}.
double structure_defect(const ReducedBlocks& b);

struct LmiOptions {
    int max_iterations = 20000;
    int restarts = 6;
    double target = 1e-6;  // stop once the objective drops below -target
    std::uint64_t seed = 2024;
};

struct LmiCertificate {
    Mat P_theta;
    Mat D_v;       // diagonal
    Mat Q;         // the block matrix built from (P_theta, D_v)
    double margin = 0.0;   // max eig(Q + Q'); when infeasible, at the best pair clipped to P >= 0, D >= 0
    double alpha_s = 0.0;  // min eig(-(Q + Q'))
    bool feasible = false;
    double objective = 0.0;  // best max eig of blkdiag(-P, -D, Q + Q') reached
    int iterations = 0;
};

/// Builds Q = [P R_theta, P R_thetaV; D R_vtheta_new, D (R_vV_new - beta I)].
Mat lmi_matrix(const ReducedBlocks& b, double beta, const Mat& P_theta, const Mat& D_v);

/// Searches (P_theta, D_v) with P_theta > 0, D_v > 0 diagonal, Q + Q' < 0.
/// The returned certificate is re-checked by Cholesky factorizations before `feasible` is set.
LmiCertificate solve_lmi(const ReducedBlocks& b, double beta, const LmiOptions& options = {});

/// True iff P > 0, diag(D) > 0 and -(Q + Q') > 0, checked by Cholesky factorization.
bool verify_certificate(const ReducedBlocks& b, double beta, const Mat& P_theta, const Mat& D_v);

/// Solves A' X + X A = -C for X (dense Kronecker formulation; small problems only).
Mat solve_lyapunov(const Mat& A, const Mat& C);

struct BoundaryLayerReport {
    Mat P_y;
    double alpha_f = 0.0;     // min eig of -(P_y R_zeta + R_zeta' P_y)
    double min_eig_P_y = 0.0;
    Eigen::VectorXcd R_zeta_spectrum;
    bool positive_definite = false;
};

BoundaryLayerReport boundary_layer_check(const ReducedBlocks& b);

/// Linearization data of the voltage nonlinearity at the equilibrium integrator state.
struct VoltageSlopes {
    Vec h;     // dV/dv = sech^2(v/Delta)
    Vec drho;  // d(rho(v) v)/dv
};

VoltageSlopes voltage_slopes(const ControllerParams& params, const Vec& v_bar);

/// Jacobian of the grounded system in (r_theta, v, r_zeta) for a given eps = tau_d/tau_v.
Mat grounded_jacobian(const ReducedBlocks& b, const ControllerParams& params, const VoltageSlopes& s, double eps);

/// Jacobian of the quasi-steady reduced system in (r_theta, v).
Mat reduced_jacobian(const ReducedBlocks& b, const ControllerParams& params, const VoltageSlopes& s);

double spectral_abscissa(const Mat& A);

struct SweepRow {
    double ratio = 0.0;
    double abscissa = 0.0;       // grounded reduced-order model
    double full_abscissa = 0.0;  // full closed loop, structural zero modes removed
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double quasi_steady_abscissa = 0.0;  // eps -> 0 limit
    int monotonicity_violations = 0;     // increases as the ratio decreases
};

/// Spectral abscissa of the grounded model for each tau_d/tau_v ratio, plus the
/// corresponding full closed-loop model (tau_d = ratio * tau_v) around the same equilibrium.
SweepResult epsilon_sweep(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                          const Equilibrium& eq, const std::vector<double>& ratios);

/// Full closed-loop Jacobian at an equilibrium with the uniform-angle and uniform-dual
/// directions removed (5n - 2 states).
Mat full_grounded_jacobian(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                           const Equilibrium& eq);

/// Nonlinear quasi-steady reduced system in (r_theta, v) with the linear power-flow model.
class ReducedSystem {
  public:
    ReducedSystem(ReducedBlocks blocks, ControllerParams params);

    Eigen::Index angle_size() const noexcept { return blocks_.R_theta.rows(); }
    Eigen::Index ibr_count() const noexcept { return blocks_.R_vV.rows(); }

    /// d/dt of [r_theta; v].
    Vec rhs(const Vec& x) const;

    /// S_s = 1/2 dr' P dr + tau_v sum_i D_ii int_0^{dv_i} h_i(s) ds with the closed-form log-cosh integral.
    double lyapunov(const LmiCertificate& cert, const Vec& x, const Vec& x_bar) const;

  private:
    ReducedBlocks blocks_;
    ControllerParams params_;
};

struct StabilityAnalysis {
    Equilibrium equilibrium;
    LinearizedModel linearization;
    ReducedBlocks blocks;
    LmiCertificate lmi;
    BoundaryLayerReport boundary;
    SweepResult sweep;
};

StabilityAnalysis analyze_stability(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                                    double omega_nom, const std::vector<double>& ratios,
                                    const LmiOptions& lmi_options = {});

std::string format_report(const StabilityAnalysis& a);
std::string format_sweep_csv(const SweepResult& s);

}  // namespace qshare
