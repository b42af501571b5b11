#include "oracles.hpp"
#include "qshare/graph.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qshare;

TEST_CASE("laplacian of a single edge") {
    const CommGraph g(2, {{0, 1, 1.0}});
    Mat expected(2, 2);
    expected << 1, -1, -1, 1;
    CHECK(laplacian(g).isApprox(expected));
}

TEST_CASE("5-ring laplacian rows") {
    const Mat L = laplacian(CommGraph::ring(5));
    for (int i = 0; i < 5; ++i) {
        CHECK(L(i, i) == 2.0);
        int minus = 0, zero = 0;
        for (int j = 0; j < 5; ++j) {
            if (j == i) continue;
            if (L(i, j) == -1.0) ++minus;
            if (L(i, j) == 0.0) ++zero;
        }
        CHECK(minus == 2);
        CHECK(zero == 2);
    }
}

TEST_CASE("laplacian row and column sums vanish exactly") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> w(0.1, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 7;
        std::vector<Edge> e;
        for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w(rng)});
        if (n > 3) e.push_back({0, n - 1, w(rng)});
        const Mat L = laplacian(CommGraph(n, e));
        CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
        CHECK(L.colwise().sum().cwiseAbs().maxCoeff() < 1e-15);
        CHECK(L.isApprox(L.transpose()));
        const auto ev = oracle::jacobi_eigenvalues(L);
        CHECK(ev.front() > -1e-10);
        CHECK(std::abs(ev[0]) < 1e-10);
        CHECK(ev[1] > 1e-10);  // exactly one zero eigenvalue
    }
}

TEST_CASE("algebraic connectivity") {
    CHECK(algebraic_connectivity(CommGraph(2, {{0, 1, 1.0}})) == doctest::Approx(2.0).epsilon(1e-12));

    const double ring5 = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / 5.0);
    const auto ev = oracle::jacobi_eigenvalues(laplacian(CommGraph::ring(5)));
    CHECK(ev[1] == doctest::Approx(ring5).epsilon(1e-12));
    CHECK(algebraic_connectivity(CommGraph::ring(5)) == doctest::Approx(ring5).epsilon(1e-12));
    CHECK(ring5 == doctest::Approx(1.3820).epsilon(1e-4));

    for (std::size_t n = 3; n <= 6; ++n) {
        const auto g = CommGraph::complete(n);
        CHECK(oracle::jacobi_eigenvalues(laplacian(g))[1] == doctest::Approx(static_cast<double>(n)));
        CHECK(algebraic_connectivity(g) == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
    }
}

TEST_CASE("algebraic connectivity matches the oracle on random graphs up to n = 20") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> w(0.2, 2.0);
    std::bernoulli_distribution coin(0.3);
    for (std::size_t n = 2; n <= 20; ++n) {
        std::vector<Edge> e;
        for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w(rng)});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 2; j < n; ++j)
                if (coin(rng)) e.push_back({i, j, w(rng)});
        const CommGraph g(n, e);
        CHECK(std::abs(algebraic_connectivity(g) - oracle::jacobi_eigenvalues(laplacian(g))[1]) < 1e-9);
    }
}

TEST_CASE("consensus gain matrix") {
    const CommGraph g2(2, {{0, 1, 1.0}});
    Mat expected(2, 2);
    expected << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
    CHECK((consensus_gain_matrix(g2, 1.0) - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(consensus_gain_matrix(g2, 0.0).isApprox(Mat::Identity(2, 2)));

    const auto g = CommGraph::ring(5);
    for (double k : {0.1, 1.0, 7.24, 100.0}) {
        const Mat K = consensus_gain_matrix(g, k);
        CHECK((K * Vec::Ones(5) - Vec::Ones(5)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(K.isApprox(K.transpose(), 1e-12));
        CHECK(oracle::min_eig(K) > 0.0);
    }
    CHECK_THROWS_AS(consensus_gain_matrix(g, -1.0), ModelError);
}

TEST_CASE("graph validation") {
    CHECK_THROWS_AS(CommGraph(3, {{0, 1, 1.0}}), ModelError);             // disconnected
    CHECK_THROWS_AS(CommGraph(2, {{0, 0, 1.0}, {0, 1, 1.0}}), ModelError); // self-loop
    CHECK_THROWS_AS(CommGraph(2, {{0, 2, 1.0}}), ModelError);             // out of range
    CHECK_THROWS_AS(CommGraph(2, {{0, 1, -1.0}}), ModelError);            // negative weight
    CHECK_THROWS_AS(CommGraph(2, {{0, 1, 1.0}, {1, 0, 1.0}}), ModelError); // duplicate
    const auto g = CommGraph::ring(4);
    CHECK(g.adjacency().isApprox(g.adjacency().transpose()));
    CHECK(g.adjacency().diagonal().isZero());
    CHECK(g.neighbours(0).size() == 2);
}
