#include "fixtures.hpp"
#include "qshare/simulator.hpp"
#include "qshare/steady_state.hpp"

#include <doctest.h>

#include <cmath>

using namespace qshare;

namespace {

Scenario lv5_base(double t_end) {
    Scenario s = fixture::lv5().scenario;
    s.events.clear();
    s.settings.t_end = t_end;
    return s;
}

Scenario lv5_proposed(double t_end) {
    Scenario s = lv5_base(t_end);
    s.initial.mode = ControlMode::Proposed;
    return s;
}

double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("zero network leaves the state at rest") {
    const auto& lv = fixture::lv5().scenario;
    ReducedNetwork zero{Mat::Zero(5, 5), Mat::Zero(5, 5)};
    for (auto mode : {ControlMode::Droop, ControlMode::Proposed}) {
        ClosedLoopModel m(zero, lv.graph, lv.params, mode);
        const Vec x = Vec::Zero(static_cast<Eigen::Index>(m.state_size()));
        CHECK(m.rhs(x).cwiseAbs().maxCoeff() == 0.0);
        CHECK((m.voltage(Vec::Zero(5)) - lv.params.v_star()).norm() == 0.0);
    }

    // Open-circuit feeders: admittance 1e-12 p.u. on every branch and no loads.
    Scenario s = lv5_proposed(5.0);
    s.network.loads.clear();
    for (auto& c : s.network.connectors) {
        c.r = 1e12;
        c.x = 0.0;
    }
    for (auto& l : s.network.lines) {
        l.r = 1e12;
        l.x = 0.0;
    }
    const auto ts = simulate(s);
    CHECK(ts.v.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ts.lambda.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(ts.theta.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ts.V.rowwise() - s.params.v_star().transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("droop mode synchronizes and shares active power") {
    const auto ts = simulate(lv5_base(10.0));
    const auto k = ts.samples() - 1;
    const Vec f = ts.f.row(static_cast<Eigen::Index>(k)).transpose();
    const Vec pr = ts.P_ratio.row(static_cast<Eigen::Index>(k)).transpose();
    CHECK(f.maxCoeff() - f.minCoeff() < 1e-6);
    CHECK(pr.maxCoeff() - pr.minCoeff() < 1e-3);
    CHECK(ts.final_mode == ControlMode::Droop);
    CHECK(ts.samples() == 1001);
    // Common frequency equals the droop prediction omega_nom - m* mean(P/S).
    const double wn = fixture::lv5().scenario.network.bases.omega_nom();
    const double m = fixture::lv5().scenario.params.ibrs[0].m_omega;
    CHECK(2 * M_PI * f(0) == doctest::Approx(wn - m * pr.mean()).epsilon(1e-6));
}

TEST_CASE("unit load scaling is a no-op event") {
    Scenario a = lv5_proposed(6.0);
    Scenario b = a;
    b.events.push_back({3.0, EventKind::ScaleLoad, 5, 1.0});
    const auto x = simulate(a), y = simulate(b);
    REQUIRE(x.samples() == y.samples());
    CHECK(max_abs_diff(x.V, y.V) <= 1e-12);
    CHECK(max_abs_diff(x.Q, y.Q) <= 1e-12);
    CHECK(max_abs_diff(x.zeta, y.zeta) <= 1e-12);
}

TEST_CASE("uniform angle shift does not change the electrical channels") {
    Scenario a = lv5_proposed(5.0);
    Scenario b = a;
    b.initial.theta = Vec::Constant(5, 0.7);
    const auto x = simulate(a), y = simulate(b);
    CHECK(max_abs_diff(x.P, y.P) < 1e-6);
    CHECK(max_abs_diff(x.Q, y.Q) < 1e-6);
    CHECK(max_abs_diff(x.V, y.V) < 1e-6);
    CHECK(max_abs_diff(x.f, y.f) < 1e-6);
}

TEST_CASE("tighter integration barely moves the final state") {
    Scenario a = lv5_base(15.0);
    a.events = {{5.0, EventKind::ActivateController}};
    Scenario b = a;
    b.settings.rel_tol = a.settings.rel_tol / 32.0;
    b.settings.abs_tol = a.settings.abs_tol / 32.0;
    const auto x = simulate(a), y = simulate(b);
    CHECK((x.final_state - y.final_state).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(y.accepted_steps > x.accepted_steps);
}

TEST_CASE("case timeline keeps voltages contained and conserves the dual sum") {
    const Scenario s = fixture::lv5().scenario;
    const auto ts = simulate(s);
    CHECK(ts.containment_checks > 0);
    CHECK(ts.containment_violations == 0);
    CHECK(ts.min_containment_margin > 0.0);
    for (const auto& seg : ts.segments)
        if (seg.mode == ControlMode::Proposed) CHECK(seg.max_dual_drift <= 1e-8);
    // Samples in proposed mode sit strictly inside the active band.
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(ts.samples()); ++k) {
        if (ts.mode[static_cast<std::size_t>(k)] != ControlMode::Proposed) continue;
        CHECK(((ts.V.row(k) - ts.v_min.row(k)).array() > 0.0).all());
        CHECK(((ts.v_max.row(k) - ts.V.row(k)).array() > 0.0).all());
    }
    CHECK(ts.segments.size() == 4);
}

TEST_CASE("saturated set and sharing error") {
    Scenario s = lv5_proposed(0.05);
    const double d = s.params.ibrs[0].delta();
    s.initial.v = Vec::Zero(5);
    CHECK(detect_saturated_set(simulate(s), 0.0).empty());
    s.initial.v(0) = 4 * d;
    CHECK(detect_saturated_set(simulate(s), 0.0) == std::set<int>{1});
    CHECK_THROWS_AS(detect_saturated_set(simulate(s), 3.0), ModelError);

    TimeSeries flat;
    flat.t = {0.0};
    flat.Q_ratio = Mat::Constant(1, 4, 0.37);
    CHECK(sharing_error(flat, 0.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sharing error against the solved equilibrium") {
    const Scenario& lv = fixture::lv5().scenario;
    const auto ts = simulate(lv);
    const auto net = kron_reduce(lv.network);
    const auto eq = solve_equilibrium(net, lv.graph, lv.params, lv.network.bases.omega_nom());
    const double beta = lv.params.gains.beta;
    const Vec err = sharing_error(ts, 24.0);
    for (int i = 0; i < 5; ++i) {
        const double vs = lv.params.ibrs[static_cast<std::size_t>(i)].v_star();
        CHECK(std::abs(err(i) - beta * std::abs(1.0 - eq.V(i) / vs)) <= 1e-3);
    }

    // Saturated IBRs just before the load is restored obey the leakage-widened bound.
    const double t = 39.99;
    const auto k = static_cast<Eigen::Index>(ts.index_at(t));
    const auto sat = detect_saturated_set(ts, t);
    CHECK(!sat.empty());
    const Vec e = sharing_error(ts, t);
    for (int i : sat) {
        const auto c = static_cast<Eigen::Index>(i - 1);
        const double vs = lv.params.ibrs[static_cast<std::size_t>(c)].v_star();
        const double bound = beta * std::abs(1.0 - ts.V(k, c) / vs) + ts.rho(k, c) * std::abs(ts.v(k, c) / vs);
        CHECK(e(c) <= bound + 1e-3);
    }
}

TEST_CASE("invalid scenarios are rejected with every problem") {
    Scenario s = lv5_base(5.0);
    s.events = {{3.0, EventKind::ScaleLoad, 99, 0.5}, {2.0, EventKind::ActivateController}};
    s.settings.rel_tol = 0.0;
    const auto errs = s.check();
    CHECK(errs.size() >= 3);
    CHECK_THROWS_AS(simulate(s), ModelError);
}
