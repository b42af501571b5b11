#include "fixtures.hpp"
#include "oracles.hpp"
#include "qshare/tuner.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qshare;

namespace {

TuningResult tune_lv5(const TuningSpec& spec = {}) {
    const auto& s = fixture::lv5().scenario;
    return tune(spec, s.graph, s.params.ibrs, s.network.bases.f_nom_hz);
}

ControllerParams table_params() { return fixture::lv5().scenario.params; }

}  // namespace

TEST_CASE("gains for the lv5 reference set") {
    const auto r = tune_lv5();
    // sigma_2 of the 5-ring: 2 - 2 cos(2 pi / 5).
    const double sigma2 = 2.0 - 2.0 * std::cos(2.0 * M_PI / 5.0);
    CHECK(r.sigma2 == doctest::Approx(sigma2).epsilon(1e-12));
    CHECK(r.sigma2 == doctest::Approx(1.3820).epsilon(1e-4));
    CHECK(r.params.gains.k == doctest::Approx(10.0 / sigma2).epsilon(1e-12));
    CHECK(std::abs(r.params.gains.k - 7.236) <= 0.005);
    CHECK(std::abs(r.params.gains.k - 7.24) <= 0.005);
    CHECK(std::abs(r.m_star - 1.571) <= 0.001);
    CHECK(r.m_star == doctest::Approx(2.0 * M_PI * 0.25).epsilon(1e-14));
    for (const auto& p : r.params.ibrs) {
        CHECK(p.m_v == doctest::Approx(0.05));
        CHECK(p.m_v * 220.0 == doctest::Approx(11.0));
        CHECK(p.m_omega == doctest::Approx(r.m_star));
    }
    const auto& g = r.params.gains;
    CHECK(g.tau_omega == doctest::Approx(0.1));
    CHECK(g.tau_p == doctest::Approx(0.01));
    CHECK(g.tau_d == doctest::Approx(0.1));
    CHECK(g.tau_v == doctest::Approx(1.0));
    CHECK(g.beta == doctest::Approx(0.01));
    CHECK(r.beta_halvings == 0);
    CHECK(r.warnings.empty());
}

TEST_CASE("tuned time constant reproduces the design RoCoF") {
    for (double rocof : {0.5, 1.0, 2.5, 4.0}) {
        TuningSpec spec;
        spec.rocof_star = rocof;
        const auto r = tune_lv5(spec);
        // Unit power step from rest: |dOmega/dt| = m / tau_Omega.
        const double initial = r.m_star / r.params.gains.tau_omega / (2.0 * M_PI);
        CHECK(initial == doctest::Approx(rocof).epsilon(1e-14));
    }
}

TEST_CASE("tuned parameters always validate") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> df(0.001, 0.02), ro(0.5, 5.0), tp(0.001, 0.05), kd(1.0, 30.0),
        bud(1e-5, 1e-3), floor(0.0, 0.5);
    for (int k = 0; k < 200; ++k) {
        TuningSpec spec;
        spec.delta_f_max_pu = df(rng);
        spec.rocof_star = ro(rng);
        spec.tau_p = tp(rng);
        spec.k_d = kd(rng);
        spec.beta_error_budget = bud(rng);
        spec.tau_d_floor = floor(rng);
        const auto r = tune_lv5(spec);
        const auto v = validate(r.params, spec.beta_error_budget);
        CHECK(v.pass());
        CHECK(r.params.gains.beta <= spec.beta_cap);
    }
}

TEST_CASE("tight budget halves beta") {
    TuningSpec spec;
    spec.beta_error_budget = 1e-4;
    const auto r = tune_lv5(spec);
    CHECK(r.params.gains.beta == doctest::Approx(0.01 / 8.0));
    CHECK(r.beta_halvings == 3);
}

TEST_CASE("slow voltage loop raises a warning") {
    TuningSpec spec;
    spec.rocof_star = 0.1;
    const auto r = tune_lv5(spec);
    CHECK(r.params.gains.tau_v > 10.0);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("1547") != std::string::npos);
}

TEST_CASE("invalid tuning inputs") {
    TuningSpec spec;
    spec.k_d = 0.0;
    CHECK_THROWS_AS(tune_lv5(spec), ModelError);
    spec = {};
    spec.beta_error_budget = 1e-300;
    CHECK_THROWS_AS(tune_lv5(spec), ModelError);
    CHECK(TuningSpec{}.check().empty());
}

TEST_CASE("validation of the lv5 parameter set") {
    const auto v = validate(table_params());
    CHECK(v.pass());
    CHECK(v.violations().empty());
    // Sits exactly on every boundary.
    CHECK(v.items[0].value == doctest::Approx(v.items[0].bound));
    CHECK(v.items[1].value == doctest::Approx(v.items[1].bound));
    for (std::size_t i = 2; i < v.items.size(); ++i) CHECK(v.items[i].value == doctest::Approx(5e-4));

    auto p = table_params();
    p.gains.tau_d = p.gains.tau_p;
    const auto bad = validate(p);
    CHECK_FALSE(bad.pass());
    REQUIRE(bad.violations().size() == 1);
    CHECK(bad.violations()[0].find("tau_d >= 10 tau_p") != std::string::npos);

    p = table_params();
    p.gains.tau_v = 0.99;
    CHECK_FALSE(validate(p).pass());

    p = table_params();
    p.gains.beta = 0.0100001;
    const auto over = validate(p);
    CHECK(over.violations().size() == 5);
    CHECK(format_validation(over).find("violated") != std::string::npos);
}
