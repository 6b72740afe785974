#include "magnet/autodiff.hpp"

#include <cmath>

namespace magnet::ad {

const Matrix& Var::value() const { return tape->value(*this); }
const Matrix& Var::grad() const { return tape->grad(*this); }

Var Tape::emit(Matrix value, std::function<void(Tape&, const Matrix&)> pull) {
    Node n;
    n.adjoint = Matrix::Zero(value.rows(), value.cols());
    n.value = std::move(value);
    n.pull = std::move(pull);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Matrix value) { return emit(std::move(value), nullptr); }
Var Tape::constant(Matrix value) { return emit(std::move(value), nullptr); }

static void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeMismatch(std::string(op) + ": shape mismatch");
}

Var Tape::add(Var a, Var b) {
    check_same_shape(a.value(), b.value(), "add");
    return emit(a.value() + b.value(), [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g);
        t.accumulate(b.idx, g);
    });
}

Var Tape::sub(Var a, Var b) {
    check_same_shape(a.value(), b.value(), "sub");
    return emit(a.value() - b.value(), [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g);
        t.accumulate(b.idx, -g);
    });
}

Var Tape::mul(Var a, Var b) {
    check_same_shape(a.value(), b.value(), "mul");
    return emit(a.value().cwiseProduct(b.value()), [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g.cwiseProduct(t.value(b)));
        t.accumulate(b.idx, g.cwiseProduct(t.value(a)));
    });
}

Var Tape::matmul(Var a, Var b) {
    if (a.value().cols() != b.value().rows()) throw ShapeMismatch("matmul: inner dims differ");
    return emit(a.value() * b.value(), [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g * t.value(b).transpose());
        t.accumulate(b.idx, t.value(a).transpose() * g);
    });
}

Var Tape::scale(Var a, double c) {
    return emit(a.value() * c, [a, c](Tape& t, const Matrix& g) { t.accumulate(a.idx, g * c); });
}

Var Tape::add_scalar(Var a, double c) {
    Matrix out = (a.value().array() + c).matrix();
    return emit(std::move(out), [a](Tape& t, const Matrix& g) { t.accumulate(a.idx, g); });
}

Var Tape::add_rowvec(Var a, Var row) {
    if (row.value().rows() != 1 || row.value().cols() != a.value().cols())
        throw ShapeMismatch("add_rowvec: row must be 1 x cols(a)");
    Matrix out = a.value();
    out.rowwise() += row.value().row(0);
    return emit(std::move(out), [a, row](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g);
        t.accumulate(row.idx, g.colwise().sum());
    });
}

Var Tape::row_scale(Var a, Var row) {
    if (row.value().rows() != 1 || row.value().cols() != a.value().cols())
        throw ShapeMismatch("row_scale: row must be 1 x cols(a)");
    Matrix out = (a.value().array().rowwise() * row.value().row(0).array()).matrix();
    return emit(std::move(out), [a, row](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, (g.array().rowwise() * t.value(row).row(0).array()).matrix());
        t.accumulate(row.idx, g.cwiseProduct(t.value(a)).colwise().sum());
    });
}

Var Tape::transpose(Var a) {
    return emit(a.value().transpose(),
                [a](Tape& t, const Matrix& g) { t.accumulate(a.idx, g.transpose()); });
}

Var Tape::sigmoid(Var a) {
    Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
    return emit(out, [a, me = nodes_.size()](Tape& t, const Matrix& g) {
        const Matrix& s = t.nodes_[me].value;
        t.accumulate(a.idx, g.cwiseProduct(s.cwiseProduct(Matrix::Ones(s.rows(), s.cols()) - s)));
    });
}

Var Tape::exp(Var a) {
    Matrix out = a.value().array().exp().matrix();
    return emit(out, [a, me = nodes_.size()](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g.cwiseProduct(t.nodes_[me].value));
    });
}

Var Tape::log(Var a) {
    if ((a.value().array() <= 0.0).any()) throw DomainError("log of non-positive value");
    Matrix out = a.value().array().log().matrix();
    return emit(std::move(out), [a](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g.cwiseQuotient(t.value(a)));
    });
}

Var Tape::relu(Var a) {
    return emit(a.value().cwiseMax(0.0), [a](Tape& t, const Matrix& g) {
        Matrix ga = (t.value(a).array() > 0.0).select(g.array(), 0.0).matrix();
        t.accumulate(a.idx, ga);
    });
}

Var Tape::sin(Var a) {
    Matrix out = a.value().array().sin().matrix();
    return emit(std::move(out), [a](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g.cwiseProduct(Matrix(t.value(a).array().cos())));
    });
}

Var Tape::cos(Var a) {
    Matrix out = a.value().array().cos().matrix();
    return emit(std::move(out), [a](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, -g.cwiseProduct(Matrix(t.value(a).array().sin())));
    });
}

Var Tape::pow_const(Var a, double p) {
    Matrix out = a.value().array().pow(p).matrix();
    return emit(std::move(out), [a, p](Tape& t, const Matrix& g) {
        t.accumulate(a.idx, g.cwiseProduct(Matrix(p * t.value(a).array().pow(p - 1.0))));
    });
}

Var Tape::sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return emit(out, [a](Tape& t, const Matrix& g) {
        const Matrix& v = t.value(a);
        t.accumulate(a.idx, Matrix::Constant(v.rows(), v.cols(), g(0, 0)));
    });
}

Var Tape::mean(Var a) {
    const double inv = 1.0 / static_cast<double>(a.value().size());
    Matrix out(1, 1);
    out(0, 0) = a.value().sum() * inv;
    return emit(out, [a, inv](Tape& t, const Matrix& g) {
        const Matrix& v = t.value(a);
        t.accumulate(a.idx, Matrix::Constant(v.rows(), v.cols(), g(0, 0) * inv));
    });
}

Var Tape::softmax_rows(Var a) {
    Matrix out = a.value();
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        Eigen::ArrayXd e = (out.row(r).array() - out.row(r).maxCoeff()).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return emit(out, [a, me = nodes_.size()](Tape& t, const Matrix& g) {
        const Matrix& s = t.nodes_[me].value;
        Matrix ga(s.rows(), s.cols());
        for (Eigen::Index r = 0; r < s.rows(); ++r) {
            const double dot = g.row(r).dot(s.row(r));
            ga.row(r) = s.row(r).cwiseProduct(g.row(r).array().matrix() -
                                              Matrix::Constant(1, s.cols(), dot));
        }
        t.accumulate(a.idx, ga);
    });
}

Var Tape::log_softmax_rows(Var a) {
    Matrix out = a.value();
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double m = out.row(r).maxCoeff();
        const double lse = m + std::log((out.row(r).array() - m).exp().sum());
        out.row(r).array() -= lse;
    }
    return emit(out, [a, me = nodes_.size()](Tape& t, const Matrix& g) {
        const Matrix& ls = t.nodes_[me].value;
        Matrix ga(ls.rows(), ls.cols());
        for (Eigen::Index r = 0; r < ls.rows(); ++r) {
            const double gsum = g.row(r).sum();
            ga.row(r) = g.row(r) - gsum * ls.row(r).array().exp().matrix();
        }
        t.accumulate(a.idx, ga);
    });
}

Var Tape::stop_gradient(Var a) { return emit(a.value(), nullptr); }

Var Tape::scatter_symmetric(Var params, const std::vector<std::pair<int, int>>& edges, int n) {
    if (static_cast<std::size_t>(params.value().size()) != edges.size())
        throw ShapeMismatch("scatter_symmetric: params size != edge count");
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        out(i, j) = out(j, i) = params.value()(static_cast<Eigen::Index>(e));
    }
    return emit(std::move(out), [params, edges](Tape& t, const Matrix& g) {
        const Matrix& pv = t.value(params);
        Matrix gp = Matrix::Zero(pv.rows(), pv.cols());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [i, j] = edges[e];
            gp(static_cast<Eigen::Index>(e)) = g(i, j) + g(j, i);
        }
        t.accumulate(params.idx, gp);
    });
}

void Tape::backward(Var root) {
    if (root.value().rows() != 1 || root.value().cols() != 1)
        throw NonScalarRoot("backward root must be scalar");
    for (auto& n : nodes_) n.adjoint.setZero();
    nodes_[root.idx].adjoint(0, 0) = 1.0;
    for (int i = root.idx; i >= 0; --i)
        if (nodes_[i].pull && !nodes_[i].adjoint.isZero(0.0))
            nodes_[i].pull(*this, nodes_[i].adjoint);
}

double grad_check(const std::function<Var(Tape&, const std::vector<Var>&)>& builder,
                  const std::vector<Matrix>& params, double h) {
    // analytic gradients
    std::vector<Matrix> analytic;
    {
        Tape tape;
        std::vector<Var> leaves;
        leaves.reserve(params.size());
        for (const auto& p : params) leaves.push_back(tape.param(p));
        Var root = builder(tape, leaves);
        tape.backward(root);
        for (const auto& l : leaves) analytic.push_back(l.grad());
    }
    auto eval = [&](const std::vector<Matrix>& ps) {
        Tape tape;
        std::vector<Var> leaves;
        leaves.reserve(ps.size());
        for (const auto& p : ps) leaves.push_back(tape.param(p));
        return builder(tape, leaves).value()(0, 0);
    };
    double max_rel = 0.0;
    std::vector<Matrix> work = params;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (Eigen::Index c = 0; c < params[p].size(); ++c) {
            const double orig = work[p](c);
            work[p](c) = orig + h;
            const double fp = eval(work);
            work[p](c) = orig - h;
            const double fm = eval(work);
            work[p](c) = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[p](c);
            const double rel =
                std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace magnet::ad
