#include "magnet/graph.hpp"

#include <algorithm>
#include <cmath>

namespace magnet {

AdjacencyMatrix::AdjacencyMatrix(int n_nodes, std::vector<std::pair<int, int>> edges)
    : n_nodes_(n_nodes) {
    if (n_nodes < 2) throw GraphError("graph needs at least 2 nodes");
    edges_.reserve(edges.size());
    for (auto [i, j] : edges) {
        if (i == j) throw GraphError("self-loop rejected");
        if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes)
            throw GraphError("edge endpoint out of range");
        if (i > j) std::swap(i, j);
        edges_.emplace_back(i, j);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool AdjacencyMatrix::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(i, j));
}

std::vector<int> AdjacencyMatrix::degrees() const {
    std::vector<int> d(n_nodes_, 0);
    for (auto [i, j] : edges_) {
        ++d[i];
        ++d[j];
    }
    return d;
}

Matrix AdjacencyMatrix::dense() const {
    Matrix a = Matrix::Zero(n_nodes_, n_nodes_);
    for (auto [i, j] : edges_) a(i, j) = a(j, i) = 1.0;
    return a;
}

Matrix NormalizedLaplacian::apply(const Matrix& x) const {
    if (x.rows() != n_nodes_) throw DimensionMismatch("feature rows != n_nodes");
    return entries_ * x;
}

NormalizedLaplacian normalized_laplacian(const AdjacencyMatrix& a) {
    auto deg = a.degrees();
    for (int i = 0; i < a.n_nodes(); ++i)
        if (deg[i] == 0) throw IsolatedNodeError(i);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * a.edges().size());
    for (auto [i, j] : a.edges()) {
        const double v = 1.0 / std::sqrt(static_cast<double>(deg[i]) * deg[j]);
        trips.emplace_back(i, j, v);
        trips.emplace_back(j, i, v);  // same value bit-for-bit
    }
    Eigen::SparseMatrix<double> m(a.n_nodes(), a.n_nodes());
    m.setFromTriplets(trips.begin(), trips.end());
    return NormalizedLaplacian(a.n_nodes(), std::move(m));
}

Matrix laplacian_power_apply(const NormalizedLaplacian& l, int k, const Matrix& x) {
    if (k < 1) throw GraphError("power must be >= 1");
    Matrix r = l.apply(x);
    for (int i = 1; i < k; ++i) r = l.apply(r);
    return r;
}

NormalizedLaplacian masked_laplacian(const AdjacencyMatrix& a, const Matrix& edge_weights,
                                     double degree_floor) {
    const int n = a.n_nodes();
    if (edge_weights.rows() != n || edge_weights.cols() != n)
        throw DimensionMismatch("edge_weights must be n x n");

    std::vector<double> wdeg(n, 0.0);
    for (auto [i, j] : a.edges()) {
        wdeg[i] += edge_weights(i, j);
        wdeg[j] += edge_weights(i, j);
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * a.edges().size());
    for (auto [i, j] : a.edges()) {
        if (edge_weights(i, j) == 0.0) continue;
        const double v =
            edge_weights(i, j) / std::sqrt((wdeg[i] + degree_floor) * (wdeg[j] + degree_floor));
        trips.emplace_back(i, j, v);
        trips.emplace_back(j, i, v);
    }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return NormalizedLaplacian(n, std::move(m));
}

}  // namespace magnet
