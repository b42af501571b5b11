#pragma once

#include "qshare/common.hpp"

#include <cstddef>
#include <vector>

namespace qshare {

struct Edge {
    std::size_t from;  // 0-based
    std::size_t to;    // 0-based
    double weight = 1.0;

    bool operator==(const Edge&) const = default;
};

/// Undirected weighted communication graph between IBRs.
///
/// The adjacency matrix is symmetric with a zero diagonal, and the graph is
/// connected over its positive-weight edges. Both properties are checked at
/// construction; a graph that violates them cannot be built.
class CommGraph {
  public:
    CommGraph(std::size_t n, std::vector<Edge> edges);

    /// Unit-weight ring 1-2-...-n-1.
    static CommGraph ring(std::size_t n);
    /// Unit-weight path 1-2-...-n.
    static CommGraph path(std::size_t n);
    /// Unit-weight complete graph.
    static CommGraph complete(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    const Mat& adjacency() const noexcept { return adjacency_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// Neighbour set of node i (0-based).
    std::vector<std::size_t> neighbours(std::size_t i) const;

    bool operator==(const CommGraph& other) const;

  private:
    std::size_t n_;
    std::vector<Edge> edges_;
    Mat adjacency_;
};

/// L = D - A with D the diagonal of row sums.
Mat laplacian(const CommGraph& g);

/// Eigenvalues of the Laplacian in ascending order.
Vec laplacian_spectrum(const CommGraph& g);

/// Second-smallest Laplacian eigenvalue (sigma_2 > 0 for connected graphs).
double algebraic_connectivity(const CommGraph& g);

/// K = (I + k L)^{-1}. k = 0 is accepted and yields the identity.
Mat consensus_gain_matrix(const CommGraph& g, double k);

}  // namespace qshare
