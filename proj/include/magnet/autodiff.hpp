#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

// Minimal reverse-mode autodiff over dense double matrices. A Tape owns the
// nodes; Var is a cheap handle. Single-threaded per tape.
namespace magnet::ad {

using Matrix = Eigen::MatrixXd;

struct AdError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeMismatch : AdError {
    using AdError::AdError;
};
struct DomainError : AdError {
    using AdError::AdError;
};
struct NonScalarRoot : AdError {
    using AdError::AdError;
};

class Tape;

struct Var {
    Tape* tape = nullptr;
    int idx = -1;
    const Matrix& value() const;
    const Matrix& grad() const;
};

class Tape {
public:
    // leaves
    Var param(Matrix value);     // participates in gradients
    Var constant(Matrix value);  // adjoint stays zero

    // arithmetic
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var matmul(Var a, Var b);
    Var scale(Var a, double c);
    Var add_scalar(Var a, double c);
    Var add_rowvec(Var a, Var row);  // broadcast a 1 x C row over every row of a
    Var row_scale(Var a, Var row);   // elementwise scale every row of a by a 1 x C row
    Var transpose(Var a);

    // elementwise functions
    Var sigmoid(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var relu(Var a);
    Var sin(Var a);
    Var cos(Var a);
    Var pow_const(Var a, double p);

    // reductions and softmax
    Var sum(Var a);   // 1x1
    Var mean(Var a);  // 1x1
    Var softmax_rows(Var a);
    Var log_softmax_rows(Var a);

    Var stop_gradient(Var a);

    // Scatter a column vector of edge parameters into a symmetric n x n matrix:
    // out(i,j) = out(j,i) = params(e) for the e-th edge, zero elsewhere.
    Var scatter_symmetric(Var params, const std::vector<std::pair<int, int>>& edges, int n);

    void backward(Var root);

    const Matrix& value(Var v) const { return nodes_[v.idx].value; }
    const Matrix& grad(Var v) const { return nodes_[v.idx].adjoint; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix adjoint;
        std::function<void(Tape&, const Matrix&)> pull;  // accumulate into parents
    };
    std::vector<Node> nodes_;

    Var emit(Matrix value, std::function<void(Tape&, const Matrix&)> pull);
    void accumulate(int idx, const Matrix& g) { nodes_[idx].adjoint += g; }
    friend struct Var;
};

// Max relative error between reverse-mode and central finite differences.
// builder maps (tape, leaf vars) to a scalar var; params give the leaf values.
double grad_check(const std::function<Var(Tape&, const std::vector<Var>&)>& builder,
                  const std::vector<Matrix>& params, double h = 1e-5);

}  // namespace magnet::ad
