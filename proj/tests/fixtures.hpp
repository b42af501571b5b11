#pragma once

#include "qshare/scenario.hpp"

#include <random>
#include <set>
#include <utility>

namespace fixture {

inline const qshare::ScenarioFile& lv5() {
    static const qshare::ScenarioFile f = qshare::load_scenario("lv5");
    return f;
}

/// Two IBRs joined through one bus by series impedances, per unit.
inline qshare::NetworkData two_ibr_junction(double r1, double x1, double r2, double x2) {
    qshare::NetworkData d;
    d.buses = {{1, qshare::BusKind::Junction}};
    d.connectors = {{1, 1, r1, x1}, {2, 1, r2, x2}};
    return d;
}

/// Random connected weighted graph: a random spanning tree plus extra chords.
inline qshare::CommGraph random_connected(std::size_t n, std::mt19937& rng, double chord_prob = 0.3) {
    std::uniform_real_distribution<double> w(0.2, 2.0), coin(0.0, 1.0);
    std::set<std::pair<std::size_t, std::size_t>> used;
    std::vector<qshare::Edge> e;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        used.insert({j, i});
        e.push_back({j, i, w(rng)});
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (!used.count({i, j}) && coin(rng) < chord_prob) e.push_back({i, j, w(rng)});
    return qshare::CommGraph(n, e);
}

}  // namespace fixture
