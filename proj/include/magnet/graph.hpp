#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <utility>
#include <vector>

namespace magnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IsolatedNodeError : GraphError {
    int node;
    explicit IsolatedNodeError(int n)
        : GraphError("node " + std::to_string(n) + " has degree 0"), node(n) {}
};
struct DimensionMismatch : GraphError {
    using GraphError::GraphError;
};

/// Undirected simple graph stored as a sorted upper-triangle edge list.
class AdjacencyMatrix {
public:
    AdjacencyMatrix(int n_nodes, std::vector<std::pair<int, int>> edges);

    int n_nodes() const { return n_nodes_; }
    // edges with i < j, sorted lexicographically
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_edge(int i, int j) const;
    std::vector<int> degrees() const;
    Matrix dense() const;

private:
    int n_nodes_;
    std::vector<std::pair<int, int>> edges_;
};

/// Sparse symmetric L with L_ij = w_ij / sqrt(d_i d_j) on the adjacency pattern.
class NormalizedLaplacian {
public:
    NormalizedLaplacian(int n_nodes, Eigen::SparseMatrix<double> entries)
        : n_nodes_(n_nodes), entries_(std::move(entries)) {}

    int n_nodes() const { return n_nodes_; }
    const Eigen::SparseMatrix<double>& entries() const { return entries_; }
    Matrix dense() const { return Matrix(entries_); }

    Matrix apply(const Matrix& x) const;

private:
    int n_nodes_;
    Eigen::SparseMatrix<double> entries_;
};

NormalizedLaplacian normalized_laplacian(const AdjacencyMatrix& a);

// L^k X by k successive sparse multiplies
Matrix laplacian_power_apply(const NormalizedLaplacian& l, int k, const Matrix& x);

// Weighted variant for mask conditioning: d_i = sum_j w_ij,
// L_ij = w_ij / sqrt((d_i + delta)(d_j + delta)).
NormalizedLaplacian masked_laplacian(const AdjacencyMatrix& a, const Matrix& edge_weights,
                                     double degree_floor = 1e-8);

}  // namespace magnet
