#include "qshare/graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <queue>
#include <sstream>

namespace qshare {

CommGraph::CommGraph(std::size_t n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)), adjacency_(Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {
    if (n_ == 0) throw ModelError("communication graph: node count must be positive");

    for (const auto& e : edges_) {
        if (e.from >= n_ || e.to >= n_) {
            std::ostringstream os;
            os << "communication graph: edge (" << e.from + 1 << ", " << e.to + 1 << ") references a node outside 1.." << n_;
            throw ModelError(os.str());
        }
        if (e.from == e.to) {
            std::ostringstream os;
            os << "communication graph: self-loop at node " << e.from + 1;
            throw ModelError(os.str());
        }
        if (!(e.weight > 0.0)) {
            std::ostringstream os;
            os << "communication graph: edge (" << e.from + 1 << ", " << e.to + 1 << ") has non-positive weight " << e.weight;
            throw ModelError(os.str());
        }
        const auto i = static_cast<Eigen::Index>(e.from);
        const auto j = static_cast<Eigen::Index>(e.to);
        if (adjacency_(i, j) != 0.0) {
            std::ostringstream os;
            os << "communication graph: duplicate edge (" << e.from + 1 << ", " << e.to + 1 << ")";
            throw ModelError(os.str());
        }
        adjacency_(i, j) = e.weight;
        adjacency_(j, i) = e.weight;
    }

    // BFS over positive-weight edges from node 0.
    std::vector<bool> seen(n_, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const auto i = frontier.front();
        frontier.pop();
        for (std::size_t j = 0; j < n_; ++j) {
            if (!seen[j] && adjacency_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
                seen[j] = true;
                ++reached;
                frontier.push(j);
            }
        }
    }
    if (reached != n_) {
        std::ostringstream os;
        os << "communication graph is disconnected; unreachable from node 1:";
        for (std::size_t j = 0; j < n_; ++j)
            if (!seen[j]) os << ' ' << j + 1;
        throw ModelError(os.str());
    }
}

CommGraph CommGraph::ring(std::size_t n) {
    std::vector<Edge> edges;
    if (n == 2) {
        edges.push_back({0, 1, 1.0});
    } else {
        for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    }
    return CommGraph(n, std::move(edges));
}

CommGraph CommGraph::path(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return CommGraph(n, std::move(edges));
}

CommGraph CommGraph::complete(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
    return CommGraph(n, std::move(edges));
}

std::vector<std::size_t> CommGraph::neighbours(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n_; ++j)
        if (adjacency_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) out.push_back(j);
    return out;
}

bool CommGraph::operator==(const CommGraph& other) const {
    return n_ == other.n_ && adjacency_ == other.adjacency_;
}

Mat laplacian(const CommGraph& g) {
    const Mat& a = g.adjacency();
    Mat l = -a;
    l.diagonal() = a.rowwise().sum();
    return l;
}

Vec laplacian_spectrum(const CommGraph& g) {
    Eigen::SelfAdjointEigenSolver<Mat> es(laplacian(g), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double algebraic_connectivity(const CommGraph& g) {
    if (g.size() < 2) return 0.0;
    return laplacian_spectrum(g)(1);
}

Mat consensus_gain_matrix(const CommGraph& g, double k) {
    if (k < 0.0) throw ModelError("consensus gain k must be nonnegative");
    const auto n = static_cast<Eigen::Index>(g.size());
    Mat m = Mat::Identity(n, n) + k * laplacian(g);
    // I + kL is symmetric positive definite for k >= 0.
    return m.llt().solve(Mat::Identity(n, n));
}

}  // namespace qshare
