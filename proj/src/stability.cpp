#include "qshare/stability.hpp"

#include "qshare/simulator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace qshare {

Transform transform_matrix(Eigen::Index n) {
    if (n < 2) throw ModelError("transform_matrix: n must be at least 2");
    Transform tr;
    tr.T = Mat::Zero(n, n);
    tr.T.row(0).setConstant(1.0 / static_cast<double>(n));
    for (Eigen::Index j = 1; j < n; ++j) {
        tr.T(j, j - 1) = -1.0;
        tr.T(j, j) = 1.0;
    }
    tr.T_inv = tr.T.partialPivLu().inverse();
    return tr;
}

namespace {

Mat selector(Eigen::Index n) {
    // I_r = [0_{n-1} I_{n-1}]
    Mat ir = Mat::Zero(n - 1, n);
    ir.rightCols(n - 1).setIdentity();
    return ir;
}

double max_sym_eig(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double min_sym_eig(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

ReducedBlocks assemble_blocks(const LinearizedModel& lin, const CommGraph& g, const ControllerParams& params,
                              double omega_nom) {
    const auto n = lin.J_theta_P.rows();
    if (n < 2) throw ModelError("assemble_blocks: at least two IBRs are required");
    if (static_cast<std::size_t>(n) != params.size() || g.size() != params.size())
        throw ModelError("assemble_blocks: inconsistent IBR counts");

    const Vec one = Vec::Ones(n);
    const double defect = std::max((lin.J_theta_P * one).lpNorm<Eigen::Infinity>(),
                                   (lin.J_theta_Q * one).lpNorm<Eigen::Infinity>());
    if (defect > 1e-6) {
        std::ostringstream os;
        os << "assemble_blocks: angle Jacobians do not annihilate the ones vector (defect " << defect << ")";
        throw ModelError(os.str());
    }

    const auto [T, Ti] = transform_matrix(n);
    const Mat Ir = selector(n);
    const Mat Irt = Ir.transpose();
    const Mat L = laplacian(g);
    const Mat K = consensus_gain_matrix(g, params.gains.k);
    const Mat I = Mat::Identity(n, n);
    const Vec s = params.s_rated();
    const Mat Sinv = s.cwiseInverse().asDiagonal();
    const Mat m = params.m_omega().asDiagonal();
    const Vec vstar = params.v_star();
    const Mat Vs = vstar.asDiagonal();
    const double inv_tv = 1.0 / params.gains.tau_v;
    const double beta = params.gains.beta;
    const Eigen::RowVectorXd avg = one.transpose() * T.transpose();  // = e_1'

    const Mat mS = m * Sinv;
    const Mat TLK = T * L * K;

    ReducedBlocks b;
    b.R_theta = -Ir * T * mS * lin.J_theta_P * Ti * Irt;
    b.R_thetaV = -Ir * T * mS * lin.J_V_P;
    b.R_vtheta = Vs * (K - I) * Sinv * lin.J_theta_Q * Ti * Irt;
    b.R_vV = Vs * (K - I) * Sinv * lin.J_V_Q;
    b.R_vzeta = -Vs * K * L * Ti * Irt;
    b.R_zetatheta = inv_tv * Ir * TLK * Sinv * lin.J_theta_Q * Ti * Irt;
    b.R_zetaV = inv_tv * Ir * TLK * Sinv * lin.J_V_Q;
    b.R_zeta = -inv_tv * Ir * TLK * L * Ti * Irt;

    b.R_theta_av = -avg * T * mS * lin.J_theta_P * Ti * Irt;
    b.R_thetaV_av = -avg * T * mS * lin.J_V_P;
    b.d_theta = Ir * (omega_nom * T * one) - Ir * T * mS * lin.w_P;
    b.d_v = beta * vstar + Vs * (K - I) * Sinv * lin.w_Q;
    b.d_zeta = inv_tv * Ir * TLK * Sinv * lin.w_Q;
    b.d_theta_av = (avg * (omega_nom * T * one))(0) - (avg * T * mS * lin.w_P)(0);

    Eigen::PartialPivLU<Mat> rz(b.R_zeta);
    b.R_vtheta_new = b.R_vtheta - b.R_vzeta * rz.solve(b.R_zetatheta);
    b.R_vV_new = b.R_vV - b.R_vzeta * rz.solve(b.R_zetaV);
    b.d_v_new = b.d_v - b.R_vzeta * rz.solve(b.d_zeta);

    b.T_theta_P = T * lin.J_theta_P * Ti;
    b.T_theta_Q = T * lin.J_theta_Q * Ti;
    b.T_zeta = T * L * Ti;
    return b;
}

double structure_defect(const ReducedBlocks& b) {
    return std::max({b.T_theta_P.col(0).lpNorm<Eigen::Infinity>(), b.T_theta_Q.col(0).lpNorm<Eigen::Infinity>(),
                     b.T_zeta.col(0).lpNorm<Eigen::Infinity>()});
}

// ---------------------------------------------------------------------------
// LMI

Mat lmi_matrix(const ReducedBlocks& b, double beta, const Mat& P_theta, const Mat& D_v) {
    const auto m = b.R_theta.rows();
    const auto n = b.R_vV.rows();
    Mat Q(m + n, m + n);
    Q.topLeftCorner(m, m) = P_theta * b.R_theta;
    Q.topRightCorner(m, n) = P_theta * b.R_thetaV;
    Q.bottomLeftCorner(n, m) = D_v * b.R_vtheta_new;
    Q.bottomRightCorner(n, n) = D_v * (b.R_vV_new - beta * Mat::Identity(n, n));
    return Q;
}

bool verify_certificate(const ReducedBlocks& b, double beta, const Mat& P_theta, const Mat& D_v) {
    if (!P_theta.isApprox(P_theta.transpose(), 1e-12)) return false;
    const Mat P = 0.5 * (P_theta + P_theta.transpose());
    if (Eigen::LLT<Mat>(P).info() != Eigen::Success) return false;
    for (Eigen::Index i = 0; i < D_v.rows(); ++i)
        if (!(D_v(i, i) > 0.0)) return false;
    const Mat Q = lmi_matrix(b, beta, P, D_v);
    const Mat S = -(Q + Q.transpose());
    return Eigen::LLT<Mat>(S).info() == Eigen::Success;
}

namespace {

/// Variables: upper triangle of P (row-major, i <= j), then diag(D).
class LmiProblem {
  public:
    LmiProblem(const ReducedBlocks& b, double beta)
        : b_(b), beta_(beta), m_(b.R_theta.rows()), n_(b.R_vV.rows()),
          M_(b.R_vV_new - beta * Mat::Identity(n_, n_)) {}

    Eigen::Index size() const { return m_ * (m_ + 1) / 2 + n_; }

    Mat P(const Vec& x) const {
        Mat p(m_, m_);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < m_; ++i)
            for (Eigen::Index j = i; j < m_; ++j) {
                p(i, j) = x(k);
                p(j, i) = x(k);
                ++k;
            }
        return p;
    }

    Mat D(const Vec& x) const { return x.tail(n_).asDiagonal(); }

    Vec pack(const Mat& p, const Vec& d) const {
        Vec x(size());
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < m_; ++i)
            for (Eigen::Index j = i; j < m_; ++j) x(k++) = p(i, j);
        x.tail(n_) = d;
        return x;
    }

    /// Coefficients of the normalization tr(P) + tr(D).
    Vec trace_coeffs() const {
        Vec a = Vec::Zero(size());
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < m_; ++i)
            for (Eigen::Index j = i; j < m_; ++j) a(k++) = (i == j) ? 1.0 : 0.0;
        a.tail(n_).setOnes();
        return a;
    }

    /// max eig of blkdiag(-P, -D, Q + Q') and a subgradient.
    double evaluate(const Vec& x, Vec& grad) const {
        const Mat p = P(x);
        const Mat q = lmi_matrix(b_, beta_, p, D(x));
        grad.setZero(size());

        Eigen::SelfAdjointEigenSolver<Mat> ep(-p);
        const double fp = ep.eigenvalues()(m_ - 1);
        Eigen::Index imin = 0;
        const double fd = -x.tail(n_).minCoeff(&imin);
        Eigen::SelfAdjointEigenSolver<Mat> eq(q + q.transpose());
        const double fq = eq.eigenvalues()(m_ + n_ - 1);

        const double f = std::max({fp, fd, fq});
        if (f == fq) {
            const Vec u = eq.eigenvectors().col(m_ + n_ - 1);
            const Vec u1 = u.head(m_);
            const Vec u2 = u.tail(n_);
            const Vec w = b_.R_theta * u1 + b_.R_thetaV * u2;
            Eigen::Index k = 0;
            for (Eigen::Index i = 0; i < m_; ++i)
                for (Eigen::Index j = i; j < m_; ++j) {
                    grad(k++) = 2.0 * (i == j ? u1(i) * w(i) : u1(i) * w(j) + u1(j) * w(i));
                }
            const Vec z = b_.R_vtheta_new * u1 + M_ * u2;
            for (Eigen::Index i = 0; i < n_; ++i) grad(k + i) = 2.0 * u2(i) * z(i);
        } else if (f == fp) {
            const Vec u = ep.eigenvectors().col(m_ - 1);
            Eigen::Index k = 0;
            for (Eigen::Index i = 0; i < m_; ++i)
                for (Eigen::Index j = i; j < m_; ++j) grad(k++) = i == j ? -u(i) * u(i) : -2.0 * u(i) * u(j);
        } else {
            grad(size() - n_ + imin) = -1.0;
        }
        return f;
    }

  private:
    const ReducedBlocks& b_;
    double beta_;
    Eigen::Index m_;
    Eigen::Index n_;
    Mat M_;
};

}  // namespace

LmiCertificate solve_lmi(const ReducedBlocks& b, double beta, const LmiOptions& opt) {
    const auto m = b.R_theta.rows();
    const auto n = b.R_vV.rows();
    if (b.R_zeta.rows() > 0 && Eigen::FullPivLU<Mat>(b.R_zeta).rank() < b.R_zeta.rows())
        throw ModelError("solve_lmi: R_zeta is singular");

    LmiProblem prob(b, beta);
    const Eigen::Index nv = prob.size();
    const Vec a = prob.trace_coeffs();
    const double a2 = a.squaredNorm();
    const double budget = static_cast<double>(m + n);  // tr(P) + tr(D)

    auto project = [&](Vec& x) { x -= ((a.dot(x) - budget) / a2) * a; };

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Vec best_x = prob.pack(Mat::Identity(m, m), Vec::Ones(n));
    Vec grad;
    double best_f = prob.evaluate(best_x, grad);
    int iterations = 0;

    for (int r = 0; r <= opt.restarts && best_f >= -opt.target; ++r) {
        Vec x;
        if (r == 0) {
            x = best_x;
        } else {
            Mat p = Mat::Identity(m, m);
            Mat noise(m, m);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < m; ++j) noise(i, j) = 0.2 * gauss(rng);
            p += 0.5 * (noise + noise.transpose());
            Vec d(n);
            for (Eigen::Index i = 0; i < n; ++i) d(i) = unif(rng);
            x = prob.pack(p, d);
        }
        project(x);
        double f = prob.evaluate(x, grad);
        const double step0 = 0.1 * std::sqrt(budget);
        for (int k = 0; k < opt.max_iterations; ++k) {
            ++iterations;
            if (f < best_f) {
                best_f = f;
                best_x = x;
            }
            if (best_f < -opt.target) break;
            Vec gp = grad - (a.dot(grad) / a2) * a;
            const double gn = gp.norm();
            if (!(gn > 0.0)) break;
            x -= (step0 / std::sqrt(static_cast<double>(k) + 1.0)) * (gp / gn);
            project(x);
            f = prob.evaluate(x, grad);
        }
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
    }

    LmiCertificate cert;
    cert.P_theta = prob.P(best_x);
    cert.D_v = prob.D(best_x);
    cert.objective = best_f;
    cert.iterations = iterations;
    cert.feasible = best_f < 0.0 && verify_certificate(b, beta, cert.P_theta, cert.D_v);
    if (!cert.feasible) {
        // Report the margin of an admissible pair: clip P and D onto the semidefinite cone.
        Eigen::SelfAdjointEigenSolver<Mat> es(cert.P_theta);
        cert.P_theta = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
        cert.D_v = cert.D_v.diagonal().cwiseMax(0.0).asDiagonal();
    }
    cert.Q = lmi_matrix(b, beta, cert.P_theta, cert.D_v);
    const Mat sym = cert.Q + cert.Q.transpose();
    cert.margin = max_sym_eig(sym);
    cert.alpha_s = min_sym_eig(-sym);
    (void)nv;
    return cert;
}

// ---------------------------------------------------------------------------

Mat solve_lyapunov(const Mat& A, const Mat& C) {
    const auto n = A.rows();
    const Mat I = Mat::Identity(n, n);
    const Mat At = A.transpose();
    // vec(A' X) = (I (x) A') vec X ; vec(X A) = (A' (x) I) vec X
    Mat K = Mat::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            K.block(i * n, j * n, n, n) += I(i, j) * At;
            K.block(i * n, j * n, n, n) += At(i, j) * I;
        }
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) throw ModelError("Lyapunov equation is singular");
    const Vec rhs = -Eigen::Map<const Vec>(C.data(), n * n);
    Vec x = lu.solve(rhs);
    Mat X = Eigen::Map<Mat>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

BoundaryLayerReport boundary_layer_check(const ReducedBlocks& b) {
    BoundaryLayerReport rep;
    const auto m = b.R_zeta.rows();
    Eigen::EigenSolver<Mat> es(b.R_zeta, false);
    rep.R_zeta_spectrum = es.eigenvalues();
    if (m > 0 && rep.R_zeta_spectrum.real().maxCoeff() >= 0.0)
        throw ModelError("boundary layer: R_zeta is not Hurwitz (communication graph must be connected)");
    rep.P_y = solve_lyapunov(b.R_zeta, Mat::Identity(m, m));
    const Mat S = -(rep.P_y * b.R_zeta + b.R_zeta.transpose() * rep.P_y);
    rep.alpha_f = m > 0 ? min_sym_eig(S) : 0.0;
    rep.min_eig_P_y = m > 0 ? min_sym_eig(rep.P_y) : 0.0;
    rep.positive_definite = m == 0 || rep.min_eig_P_y > 0.0;
    return rep;
}

// ---------------------------------------------------------------------------

VoltageSlopes voltage_slopes(const ControllerParams& params, const Vec& v_bar) {
    VoltageSlopes s{Vec(v_bar.size()), Vec(v_bar.size())};
    for (Eigen::Index i = 0; i < v_bar.size(); ++i) {
        const auto& p = params.ibrs[static_cast<std::size_t>(i)];
        s.h(i) = voltage_output_slope(p, v_bar(i));
        s.drho(i) = leakage_term_slope(p, v_bar(i));
    }
    return s;
}

Mat grounded_jacobian(const ReducedBlocks& b, const ControllerParams& params, const VoltageSlopes& s, double eps) {
    if (!(eps > 0.0)) throw ModelError("grounded_jacobian: eps must be positive");
    const auto m = b.R_theta.rows();
    const auto n = b.R_vV.rows();
    const double tv = params.gains.tau_v;
    const double beta = params.gains.beta;
    const Mat H = s.h.asDiagonal();
    const Mat I = Mat::Identity(n, n);
    Mat A = Mat::Zero(2 * m + n, 2 * m + n);
    A.block(0, 0, m, m) = b.R_theta;
    A.block(0, m, m, n) = b.R_thetaV * H;
    A.block(m, 0, n, m) = b.R_vtheta / tv;
    A.block(m, m, n, n) = ((b.R_vV - beta * I) * H - Mat(s.drho.asDiagonal())) / tv;
    A.block(m, m + n, n, m) = b.R_vzeta / tv;
    A.block(m + n, 0, m, m) = b.R_zetatheta / eps;
    A.block(m + n, m, m, n) = b.R_zetaV * H / eps;
    A.block(m + n, m + n, m, m) = b.R_zeta / eps;
    return A;
}

Mat reduced_jacobian(const ReducedBlocks& b, const ControllerParams& params, const VoltageSlopes& s) {
    const auto m = b.R_theta.rows();
    const auto n = b.R_vV.rows();
    const double tv = params.gains.tau_v;
    const double beta = params.gains.beta;
    const Mat H = s.h.asDiagonal();
    const Mat I = Mat::Identity(n, n);
    Mat A(m + n, m + n);
    A.block(0, 0, m, m) = b.R_theta;
    A.block(0, m, m, n) = b.R_thetaV * H;
    A.block(m, 0, n, m) = b.R_vtheta_new / tv;
    A.block(m, m, n, n) = ((b.R_vV_new - beta * I) * H - Mat(s.drho.asDiagonal())) / tv;
    return A;
}

double spectral_abscissa(const Mat& A) {
    if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Mat> es(A, false);
    return es.eigenvalues().real().maxCoeff();
}

Mat full_grounded_jacobian(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                           const Equilibrium& eq) {
    const auto n = static_cast<Eigen::Index>(params.size());
    const ClosedLoopModel model(net, g, params, ControlMode::Proposed);
    Vec x(5 * n);
    x << eq.theta, eq.omega, eq.v, eq.lambda, eq.zeta;
    const auto N = 5 * n;
    Mat A(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
        Vec xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        A.col(j) = (model.rhs(xp) - model.rhs(xm)) / (2.0 * h);
    }
    const auto [T, Ti] = transform_matrix(n);
    Mat Tb = Mat::Identity(N, N);
    Mat Tbi = Mat::Identity(N, N);
    Tb.block(0, 0, n, n) = T;
    Tb.block(4 * n, 4 * n, n, n) = T;
    Tbi.block(0, 0, n, n) = Ti;
    Tbi.block(4 * n, 4 * n, n, n) = Ti;
    const Mat At = Tb * A * Tbi;
    // Columns 0 (theta_av) and 4n (zeta_av) vanish; drop them with their rows.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < N; ++i)
        if (i != 0 && i != 4 * n) keep.push_back(i);
    const auto M = static_cast<Eigen::Index>(keep.size());
    Mat out(M, M);
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = 0; j < M; ++j) out(i, j) = At(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    return out;
}

SweepResult epsilon_sweep(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                          const Equilibrium& eq, const std::vector<double>& ratios) {
    const auto lin = jacobians(net, eq.theta, eq.V);
    const auto blocks = assemble_blocks(lin, g, params);
    const auto slopes = voltage_slopes(params, eq.v);

    SweepResult out;
    out.quasi_steady_abscissa = spectral_abscissa(reduced_jacobian(blocks, params, slopes));
    for (double r : ratios) {
        SweepRow row;
        row.ratio = r;
        row.abscissa = spectral_abscissa(grounded_jacobian(blocks, params, slopes, r));
        ControllerParams full = params;
        full.gains.tau_d = r * params.gains.tau_v;
        row.full_abscissa = spectral_abscissa(full_grounded_jacobian(net, g, full, eq));
        out.rows.push_back(row);
    }
    // Count increases of the abscissa when moving to a smaller ratio.
    std::vector<SweepRow> sorted = out.rows;
    std::sort(sorted.begin(), sorted.end(), [](const SweepRow& a, const SweepRow& b) { return a.ratio > b.ratio; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double tol = 1e-9 * std::max(1.0, std::abs(sorted[i - 1].abscissa));
        if (sorted[i].abscissa > sorted[i - 1].abscissa + tol) ++out.monotonicity_violations;
    }
    return out;
}

// ---------------------------------------------------------------------------

ReducedSystem::ReducedSystem(ReducedBlocks blocks, ControllerParams params)
    : blocks_(std::move(blocks)), params_(std::move(params)) {}

Vec ReducedSystem::rhs(const Vec& x) const {
    const auto m = angle_size();
    const auto n = ibr_count();
    const auto r = x.head(m);
    const auto v = x.tail(n);
    Vec V(n), leak(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = params_.ibrs[static_cast<std::size_t>(i)];
        V(i) = voltage_output(p, v(i));
        leak(i) = leakage(p, v(i)) * v(i);
    }
    const double beta = params_.gains.beta;
    Vec dx(m + n);
    dx.head(m) = blocks_.R_theta * r + blocks_.R_thetaV * V + blocks_.d_theta;
    dx.tail(n) = (blocks_.R_vtheta_new * r + blocks_.R_vV_new * V - beta * V - leak + blocks_.d_v_new) /
                 params_.gains.tau_v;
    return dx;
}

namespace {

double log_cosh(double z) {
    const double a = std::abs(z);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace

double ReducedSystem::lyapunov(const LmiCertificate& cert, const Vec& x, const Vec& x_bar) const {
    const auto m = angle_size();
    const auto n = ibr_count();
    const Vec dr = x.head(m) - x_bar.head(m);
    double s = 0.5 * dr.dot(cert.P_theta * dr);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = params_.ibrs[static_cast<std::size_t>(i)].delta();
        const double vb = x_bar(m + i);
        const double dv = x(m + i) - vb;
        // int_0^dv [D tanh((vb + s)/D) - D tanh(vb/D)] ds
        const double integral = d * d * (log_cosh((vb + dv) / d) - log_cosh(vb / d)) - dv * d * std::tanh(vb / d);
        s += params_.gains.tau_v * cert.D_v(i, i) * integral;
    }
    return s;
}

// ---------------------------------------------------------------------------

StabilityAnalysis analyze_stability(const ReducedNetwork& net, const CommGraph& g, const ControllerParams& params,
                                    double omega_nom, const std::vector<double>& ratios, const LmiOptions& lmi_options) {
    StabilityAnalysis a;
    a.equilibrium = solve_equilibrium(net, g, params, omega_nom);
    a.linearization = jacobians(net, a.equilibrium.theta, a.equilibrium.V);
    a.blocks = assemble_blocks(a.linearization, g, params, omega_nom);
    a.lmi = solve_lmi(a.blocks, params.gains.beta, lmi_options);
    a.boundary = boundary_layer_check(a.blocks);
    a.sweep = epsilon_sweep(net, g, params, a.equilibrium, ratios);
    return a;
}

std::string format_report(const StabilityAnalysis& a) {
    std::ostringstream os;
    os << std::setprecision(8);
    const auto& b = a.blocks;
    const auto m = b.R_theta.rows();
    const auto n = b.R_vV.rows();
    os << "stability analysis\n";
    os << "  IBRs: " << n << "\n";
    os << "  block dimensions: R_theta " << m << "x" << m << ", R_vV " << n << "x" << n << ", R_zeta "
       << b.R_zeta.rows() << "x" << b.R_zeta.cols() << "\n";
    os << "  transform structure defect (first columns): " << structure_defect(b) << "\n";
    os << "  R_zeta spectrum:";
    for (Eigen::Index i = 0; i < a.boundary.R_zeta_spectrum.size(); ++i) {
        const auto z = a.boundary.R_zeta_spectrum(i);
        os << ' ' << z.real();
        if (z.imag() != 0.0) os << (z.imag() > 0 ? "+" : "") << z.imag() << 'i';
    }
    os << "\n";
    os << "lmi\n";
    os << "  feasible: " << (a.lmi.feasible ? "yes" : "no (inconclusive)") << "\n";
    os << "  margin max eig(Q+Q'): " << a.lmi.margin << "\n";
    os << "  alpha_s: " << a.lmi.alpha_s << "\n";
    os << "  search objective: " << a.lmi.objective << " after " << a.lmi.iterations << " iterations\n";
    os << "  min eig(P_theta): " << min_sym_eig(a.lmi.P_theta) << "\n";
    os << "  min diag(D_v): " << a.lmi.D_v.diagonal().minCoeff() << "\n";
    os << "boundary layer\n";
    os << "  min eig(P_y): " << a.boundary.min_eig_P_y << "\n";
    os << "  alpha_f: " << a.boundary.alpha_f << "\n";
    os << "epsilon sweep (tau_d/tau_v)\n";
    os << "  quasi-steady abscissa: " << a.sweep.quasi_steady_abscissa << "\n";
    os << "      ratio      abscissa   full-model abscissa\n";
    for (const auto& r : a.sweep.rows)
        os << "  " << std::setw(9) << r.ratio << std::setw(14) << r.abscissa << std::setw(18) << r.full_abscissa
           << "\n";
    os << "  monotonicity violations: " << a.sweep.monotonicity_violations << "\n";
    return os.str();
}

std::string format_sweep_csv(const SweepResult& s) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "ratio,abscissa,full_abscissa\n";
    for (const auto& r : s.rows) os << r.ratio << ',' << r.abscissa << ',' << r.full_abscissa << '\n';
    return os.str();
}

}  // namespace qshare
