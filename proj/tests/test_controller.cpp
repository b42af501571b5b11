#include "fixtures.hpp"
#include "oracles.hpp"
#include "qshare/controller.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qshare;

namespace {

IbrParams table_ibr() {
    IbrParams p;
    p.s_rated = 1.0;
    p.m_omega = 1.57;
    p.m_v = 0.05;
    p.v_min = 0.95;
    p.v_max = 1.05;
    return p;
}

}  // namespace

TEST_CASE("voltage output") {
    const auto p = table_ibr();
    CHECK(voltage_output(p, 0.0) == doctest::Approx(1.0));
    CHECK(voltage_output(p, 0.05) == doctest::Approx(1.0 + 0.05 * std::tanh(1.0)));
    CHECK(voltage_output(p, 0.05) == doctest::Approx(1.03808).epsilon(1e-5));
    CHECK(voltage_output(p, 0.15) == doctest::Approx(1.04975).epsilon(1e-5));
    CHECK(voltage_output(p, 1e6) < 1.05 + 1e-15);
    CHECK(voltage_output(p, -1e6) > 0.95 - 1e-15);
    double prev = voltage_output(p, -0.5);
    for (double v = -0.49; v < 0.5; v += 0.01) {
        const double cur = voltage_output(p, v);
        CHECK(cur > prev);
        prev = cur;
    }
    for (double v : {-0.2, -0.01, 0.0, 0.07, 0.3}) {
        const double h = 1e-6;
        const double fd = (voltage_output(p, v + h) - voltage_output(p, v - h)) / (2 * h);
        CHECK(voltage_output_slope(p, v) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("leakage coefficient") {
    const auto p = table_ibr();
    const double d = p.delta();
    CHECK(leakage(p, 2 * d) == 0.0);
    CHECK(leakage(p, 4 * d) == doctest::Approx(1.0));
    CHECK(leakage(p, -5 * d) == doctest::Approx(2.0));
    CHECK(leakage(p, 3 * d) == 0.0);
    CHECK(leakage(p, 3 * d * (1 + 1e-12)) < 1e-10);
    CHECK(leakage(p, -3 * d * (1 + 1e-12)) < 1e-10);
    CHECK(leakage(p, 3.5 * d) <= leakage(p, 3.6 * d));

    CHECK(leakage_term_slope(p, d) == 0.0);
    // rho(v) v = v^2/Delta - 3v beyond the kink, slope 2|v|/Delta - 3.
    CHECK(leakage_term_slope(p, 4 * d) == doctest::Approx(5.0));
    CHECK(leakage_term_slope(p, -4 * d) == doctest::Approx(5.0));
    CHECK(leakage_term_slope(p, 3 * d) == doctest::Approx(3.0));
}

TEST_CASE("integrator right-hand side") {
    auto p = table_ibr();
    const double d = p.delta();
    CHECK(integrator_rhs(p, 0.01, 0.0, 0.4, 0.4) == doctest::Approx(0.0));
    CHECK(integrator_rhs(p, 0.0, 0.0, 0.31, 0.30) == doctest::Approx(0.01));
    CHECK(integrator_rhs(p, 0.0, 4 * d, 0.3, 0.3) == doctest::Approx(-4 * d));
    // Rated power scales Q.
    p.s_rated = 2.0;
    CHECK(integrator_rhs(p, 0.0, 0.0, 0.25, 0.5) == doctest::Approx(0.0));
    // beta term
    CHECK(integrator_rhs(table_ibr(), 0.01, d, 0.0, 0.0) == doctest::Approx(-0.01 * d * std::tanh(1.0)));
}

TEST_CASE("droop right-hand side") {
    auto p = table_ibr();
    const auto z = droop_rhs(p, 0.0, 0.0, 0.0, 0.0);
    CHECK(z.omega == 0.0);
    CHECK(z.v == 0.0);
    const double P = 0.4;
    const auto s = droop_rhs(p, -p.m_omega * P / p.s_rated, 0.0, P, 0.0);
    CHECK(s.omega == doctest::Approx(0.0));
    const auto q = droop_rhs(p, 0.0, -0.025, 0.0, 0.5);
    CHECK(q.v == doctest::Approx(0.0));
    CHECK(-p.m_v * 0.5 == doctest::Approx(-0.025));
}

TEST_CASE("primal-dual dynamics") {
    const auto g = CommGraph::ring(5);
    const Vec c = Vec::Constant(5, 0.3);
    const auto r = primal_dual_rhs(g, 7.24, c, Vec::Constant(5, -2.0), c);
    CHECK(r.lambda.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(r.zeta.cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937 rng(11);
    for (int k = 0; k < 20; ++k) {
        const Vec l = Vec::Random(5), z = Vec::Random(5), q = Vec::Random(5);
        const auto d = primal_dual_rhs(g, 3.0, l, z, q);
        CHECK(std::abs(d.zeta.sum()) < 1e-14);
        // Element-wise against the neighbour sums.
        const Mat& A = g.adjacency();
        for (int i = 0; i < 5; ++i) {
            double dl = q(i) - l(i), dz = 0.0;
            for (int j = 0; j < 5; ++j) {
                dl += -A(i, j) * (z(i) - z(j)) + 3.0 * A(i, j) * (l(j) - l(i));
                dz += A(i, j) * (l(i) - l(j));
            }
            CHECK(d.lambda(i) == doctest::Approx(dl).epsilon(1e-13));
            CHECK(d.zeta(i) == doctest::Approx(dz).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(primal_dual_rhs(g, 1.0, Vec::Zero(4), Vec::Zero(5), Vec::Zero(5)), ModelError);
}

TEST_CASE("primal-dual equilibrium is the mean utilization") {
    // Path graph with fixed Q ratios: integrate with explicit Euler until stationary.
    const auto g = CommGraph::path(3);
    Vec q(3);
    q << 0.1, 0.2, 0.6;
    Vec l = Vec::Zero(3), z = Vec::Zero(3);
    const double tp = 0.01, td = 0.1, dt = 1e-3;
    for (int s = 0; s < 200000; ++s) {
        const auto r = primal_dual_rhs(g, 2.0, l, z, q);
        l += dt / tp * r.lambda;
        z += dt / td * r.zeta;
    }
    for (int i = 0; i < 3; ++i) CHECK(l(i) == doctest::Approx(0.3).epsilon(1e-9));
    const auto kkt = kkt_residual(g, 2.0, l, z, q);
    CHECK(kkt.stationarity.norm() <= 1e-8);
    CHECK(kkt.consensus.norm() <= 1e-8);
    CHECK(std::abs(z.sum()) < 1e-12);
}

TEST_CASE("kkt residual") {
    const auto g = CommGraph::ring(4);
    const Vec c = Vec::Constant(4, 0.2);
    const auto r = kkt_residual(g, 1.0, c, Vec::Zero(4), c);
    CHECK(r.stationarity.norm() == 0.0);
    CHECK(r.consensus.norm() == 0.0);
    Vec l = c;
    l(2) = 0.5;
    const auto s = kkt_residual(g, 1.0, l, Vec::Zero(4), c);
    CHECK((s.consensus - laplacian(g) * l).norm() < 1e-15);
    CHECK(s.consensus.norm() > 0.1);
}

TEST_CASE("primal-dual equilibria on random graphs match a direct linear solve") {
    std::mt19937 rng(17);
    for (std::size_t n = 2; n <= 8; ++n) {
        const auto g = fixture::random_connected(n, rng);
        const Mat L = laplacian(g);
        const double k = 1.5;
        const Vec q = Vec::Random(static_cast<Eigen::Index>(n));
        // Unknowns [lambda; zeta] with 1'zeta = 0 appended to fix the gauge.
        const auto N = static_cast<Eigen::Index>(n);
        Mat A = Mat::Zero(2 * N + 1, 2 * N);
        Vec b = Vec::Zero(2 * N + 1);
        A.topLeftCorner(N, N) = Mat::Identity(N, N) + k * L;
        A.topRightCorner(N, N) = L;
        b.head(N) = q;
        A.block(N, 0, N, N) = L;
        A.bottomRightCorner(1, N).setOnes();
        const Vec x = A.colPivHouseholderQr().solve(b);
        CHECK((x.head(N).array() - q.mean()).abs().maxCoeff() < 1e-10);
        const auto kkt = kkt_residual(g, k, x.head(N), x.segment(N, N), q);
        CHECK(kkt.stationarity.norm() < 1e-10);
        CHECK(kkt.consensus.norm() < 1e-10);
    }
}

TEST_CASE("hand-off state reproduces the droop voltage") {
    const auto p = table_ibr();
    for (double V : {0.96, 0.99, 1.0, 1.02, 1.049}) {
        CHECK(voltage_output(p, integrator_state_for_voltage(p, V)) == doctest::Approx(V).epsilon(1e-12));
    }
    // Outside the band the state is clamped at |tanh| = 0.999.
    const double hi = integrator_state_for_voltage(p, 1.2);
    CHECK(std::tanh(hi / p.delta()) == doctest::Approx(0.999));
    const double lo = integrator_state_for_voltage(p, 0.5);
    CHECK(std::tanh(lo / p.delta()) == doctest::Approx(-0.999));
}

TEST_CASE("parameter validation") {
    ControllerParams c;
    c.ibrs = {table_ibr(), table_ibr()};
    CHECK(c.check().empty());
    c.ibrs[1].v_min = 1.1;
    c.gains.tau_v = -1.0;
    c.gains.beta = -0.1;
    CHECK(c.check().size() >= 3);
}
