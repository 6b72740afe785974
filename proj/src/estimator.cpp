#include "magnet/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "magnet/autodiff.hpp"

namespace magnet {

namespace {

Eigen::RowVector2d softmax2(const Eigen::RowVector2d& z) {
    const double m = z.maxCoeff();
    Eigen::RowVector2d e = (z.array() - m).exp();
    return e / e.sum();
}

int class_index(int label) { return label > 0 ? 1 : 0; }

Matrix augment(const Matrix& h) {
    Matrix z(h.rows(), h.cols() + 1);
    z.leftCols(h.cols()) = h;
    z.col(h.cols()).setOnes();
    return z;
}

}  // namespace

Eigen::RowVector2d CriticModel::logits(const Eigen::RowVectorXd& h) const {
    Eigen::RowVectorXd z(h.size() + 1);
    z << h, 1.0;
    return z * weights;
}

Eigen::RowVector2d CriticModel::probs(const Eigen::RowVectorXd& h) const {
    return softmax2(logits(h));
}

int CriticModel::predict_class(const Eigen::RowVectorXd& h) const {
    const Eigen::RowVector2d z = logits(h);
    return z(1) >= z(0) ? 1 : 0;
}

Eigen::RowVector2d HeadModel::logits(const Eigen::RowVectorXd& h) const {
    Eigen::RowVectorXd z(h.size() + 1);
    z << h, 1.0;
    if (type == HeadType::Linear) return z * w1;
    Eigen::RowVectorXd a = (z * w1).cwiseMax(0.0);
    Eigen::RowVectorXd za(a.size() + 1);
    za << a, 1.0;
    return za * w2;
}

Eigen::RowVectorXd actor_embed(const NormalizedLaplacian& l, const Matrix& x, const Matrix& w,
                               int k, Pooling pooling) {
    const Matrix h = laplacian_power_apply(l, k, x) * w;
    Eigen::RowVectorXd pooled = h.colwise().sum();
    if (pooling == Pooling::Mean) pooled /= static_cast<double>(h.rows());
    return pooled;
}

CriticModel train_critic(const Matrix& embeddings, const std::vector<int>& labels,
                         const std::vector<double>& sample_weights, int iters, double lr) {
    const int n = static_cast<int>(embeddings.rows());
    const int d = static_cast<int>(embeddings.cols());

    // precondition: descend in standardized coordinates (raw pooled embeddings
    // share a large mean with little spread, which stalls plain GD), then fold
    // the affine map back so the returned weights act on raw embeddings
    Eigen::RowVectorXd mu = embeddings.colwise().mean();
    Eigen::RowVectorXd sd =
        ((embeddings.rowwise() - mu).array().square().colwise().sum() / n).sqrt();
    for (int j = 0; j < d; ++j)
        if (sd(j) < 1e-12) sd(j) = 1.0;
    const Matrix z = augment(
        Matrix(((embeddings.rowwise() - mu).array().rowwise() / sd.array()).matrix()));

    Matrix y = Matrix::Zero(n, 2);
    for (int i = 0; i < n; ++i) y(i, class_index(labels[i])) = 1.0;
    Vector beta(n);
    for (int i = 0; i < n; ++i) beta(i) = sample_weights[i];

    Matrix w = Matrix::Zero(z.cols(), 2);
    for (int it = 0; it < iters; ++it) {
        Matrix logits = z * w;
        Matrix p(n, 2);
        for (int i = 0; i < n; ++i) p.row(i) = softmax2(logits.row(i));
        const Matrix grad = z.transpose() * (beta.asDiagonal() * (p - y));
        w -= lr * grad;
    }

    Matrix raw(d + 1, 2);
    for (int j = 0; j < d; ++j) raw.row(j) = w.row(j) / sd(j);
    raw.row(d) = w.row(d);
    for (int j = 0; j < d; ++j) raw.row(d) -= mu(j) * w.row(j) / sd(j);
    return CriticModel{std::move(raw)};
}

double weighted_error(const CriticModel& critic, const Matrix& embeddings,
                      const std::vector<int>& labels, const std::vector<double>& sample_weights,
                      double epsilon_min) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < embeddings.rows(); ++i) {
        den += sample_weights[i];
        if (critic.predict_class(embeddings.row(i)) != class_index(labels[i]))
            num += sample_weights[i];
    }
    const double eps = num / den;
    return std::clamp(eps, epsilon_min, 1.0 - epsilon_min);
}

double fusion_weight(double epsilon) {
    return std::max(0.0, 0.5 * std::log((1.0 - epsilon) / epsilon));
}

std::vector<double> update_sample_weights(const std::vector<double>& weights, double alpha,
                                          const std::vector<bool>& misclassified) {
    std::vector<double> out(weights.size());
    const double boost = std::exp(alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out[i] = misclassified[i] ? weights[i] * boost : weights[i];
        total += out[i];
    }
    for (auto& w : out) w /= total;
    return out;
}

Eigen::RowVectorXd fuse_embeddings(const std::vector<Eigen::RowVectorXd>& per_order,
                                   const std::vector<double>& alphas) {
    if (per_order.size() != alphas.size())
        throw DimensionMismatch("fuse_embeddings: order count mismatch");
    Eigen::RowVectorXd fused = Eigen::RowVectorXd::Zero(per_order[0].size());
    for (std::size_t k = 0; k < per_order.size(); ++k) {
        if (per_order[k].size() != fused.size())
            throw DimensionMismatch("fuse_embeddings: embedding dims differ");
        fused += alphas[k] * per_order[k];
    }
    return fused;
}

namespace {

HeadModel train_mlp_head(const Matrix& fused, const std::vector<int>& labels,
                         const ActorConfig& cfg) {
    const int n = static_cast<int>(fused.rows());
    const int d = static_cast<int>(fused.cols());
    std::mt19937_64 rng(cfg.seed ^ 0x6865616470726eull);
    std::uniform_real_distribution<double> init(-0.1, 0.1);
    Matrix w1(d + 1, cfg.head_hidden), w2(cfg.head_hidden + 1, 2);
    for (Eigen::Index i = 0; i < w1.size(); ++i) w1(i) = init(rng);
    for (Eigen::Index i = 0; i < w2.size(); ++i) w2(i) = init(rng);

    const Matrix z = augment(fused);
    Matrix y = Matrix::Zero(n, 2);
    for (int i = 0; i < n; ++i) y(i, class_index(labels[i])) = 1.0;

    for (int epoch = 0; epoch < cfg.head_epochs; ++epoch) {
        ad::Tape tape;
        auto vz = tape.constant(z);
        auto vw1 = tape.param(w1);
        auto vw2 = tape.param(w2);
        auto hidden = tape.relu(tape.matmul(vz, vw1));
        // append the bias column: widen with an identity block, then add ones
        Matrix grow = Matrix::Identity(cfg.head_hidden, cfg.head_hidden + 1);
        Matrix onecol = Matrix::Zero(n, cfg.head_hidden + 1);
        onecol.col(cfg.head_hidden).setOnes();
        auto hidden_aug =
            tape.add(tape.matmul(hidden, tape.constant(grow)), tape.constant(onecol));
        auto logp = tape.log_softmax_rows(tape.matmul(hidden_aug, vw2));
        auto loss = tape.scale(tape.sum(tape.mul(tape.constant(-y), logp)),
                               1.0 / static_cast<double>(n));
        tape.backward(loss);
        w1 -= cfg.head_lr * vw1.grad();
        w2 -= cfg.head_lr * vw2.grad();
    }
    return HeadModel{HeadType::Mlp, std::move(w1), std::move(w2)};
}

}  // namespace

HeadModel train_head(const Matrix& fused, const std::vector<int>& labels,
                     const ActorConfig& cfg) {
    if (cfg.head_type == HeadType::Mlp) return train_mlp_head(fused, labels, cfg);
    const int n = static_cast<int>(fused.rows());
    std::vector<double> uniform(n, 1.0 / n);
    CriticModel c = train_critic(fused, labels, uniform, cfg.head_epochs, cfg.head_lr);
    return HeadModel{HeadType::Linear, std::move(c.weights), Matrix()};
}

MaGNetModel train_magnet(const GraphDataset& train, const ActorConfig& cfg) {
    const int n = static_cast<int>(train.instances.size());
    if (n < 2) throw SingleClassTrainingSet("need at least 2 training instances");
    bool has_pos = false, has_neg = false;
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        labels[i] = train.instances[i].label;
        (labels[i] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw SingleClassTrainingSet("training set contains a single class");

    const int d = train.feat_dim();
    const auto l = normalized_laplacian(train.adjacency);
    const double pool_scale =
        cfg.pooling == Pooling::Mean ? 1.0 / static_cast<double>(train.n_nodes()) : 1.0;

    MaGNetModel model;
    model.config = cfg;
    model.actor_w = Matrix::Identity(d, d);

    // incremental Laplacian powers, one running product per instance
    std::vector<Matrix> power(n);
    for (int i = 0; i < n; ++i) power[i] = train.instances[i].features;

    std::vector<double> beta(n, 1.0 / n);
    std::vector<Matrix> order_embeddings;  // k -> n x d
    for (int k = 0; k < cfg.k_orders; ++k) {
        Matrix emb(n, d);
        for (int i = 0; i < n; ++i) {
            power[i] = l.apply(power[i]);
            emb.row(i) = (power[i] * model.actor_w).colwise().sum() * pool_scale;
        }
        CriticModel critic = train_critic(emb, labels, beta, cfg.critic_iters, cfg.critic_lr);
        const double eps = weighted_error(critic, emb, labels, beta, cfg.epsilon_min);
        const double alpha = fusion_weight(eps);
        std::vector<bool> miss(n);
        for (int i = 0; i < n; ++i)
            miss[i] = critic.predict_class(emb.row(i)) != class_index(labels[i]);
        beta = update_sample_weights(beta, alpha, miss);

        model.critics.push_back(std::move(critic));
        model.alphas.push_back(alpha);
        model.epsilons.push_back(eps);
        order_embeddings.push_back(std::move(emb));
    }
    model.final_betas = beta;

    Matrix fused = Matrix::Zero(n, d);
    for (int k = 0; k < cfg.k_orders; ++k) fused += model.alphas[k] * order_embeddings[k];

    if (cfg.w_mode == WMode::Trained) {
        // pool(L^k X W) = pool(L^k X) W, so W acts on the fused base embedding;
        // train W jointly with a linear readout, then keep the readout as head
        Matrix w = Matrix::Identity(d, d);
        Matrix head_w = Matrix::Zero(d + 1, 2);
        Matrix y = Matrix::Zero(n, 2);
        for (int i = 0; i < n; ++i) y(i, class_index(labels[i])) = 1.0;
        for (int epoch = 0; epoch < cfg.head_epochs; ++epoch) {
            ad::Tape tape;
            auto vb = tape.constant(fused);
            auto vw = tape.param(w);
            auto vh = tape.param(head_w);
            auto f = tape.matmul(vb, vw);
            Matrix grow = Matrix::Identity(d, d + 1);
            Matrix onecol = Matrix::Zero(n, d + 1);
            onecol.col(d).setOnes();
            auto faug = tape.add(tape.matmul(f, tape.constant(grow)), tape.constant(onecol));
            auto logp = tape.log_softmax_rows(tape.matmul(faug, vh));
            auto loss = tape.scale(tape.sum(tape.mul(tape.constant(-y), logp)),
                                   1.0 / static_cast<double>(n));
            tape.backward(loss);
            w -= cfg.head_lr * vw.grad();
            head_w -= cfg.head_lr * vh.grad();
        }
        model.actor_w = w;
        model.head = HeadModel{HeadType::Linear, std::move(head_w), Matrix()};
    } else {
        model.head = train_head(fused, labels, cfg);
    }
    return model;
}

Prediction predict(const MaGNetModel& model, const AdjacencyMatrix& adjacency, const Matrix& x) {
    if (x.cols() != model.actor_w.rows())
        throw DimensionMismatch("predict: feature dim mismatch");
    const auto l = normalized_laplacian(adjacency);
    std::vector<Eigen::RowVectorXd> per_order;
    Matrix power = x;
    for (int k = 0; k < model.config.k_orders; ++k) {
        power = l.apply(power);
        Eigen::RowVectorXd pooled = (power * model.actor_w).colwise().sum();
        if (model.config.pooling == Pooling::Mean) pooled /= static_cast<double>(x.rows());
        per_order.push_back(std::move(pooled));
    }
    const Eigen::RowVectorXd fused = fuse_embeddings(per_order, model.alphas);
    const Eigen::RowVector2d z = model.head.logits(fused);
    const Eigen::RowVector2d p = softmax2(z);
    return Prediction{z(1) >= z(0) ? 1 : -1, p};
}

double evaluate_accuracy(const MaGNetModel& model, const GraphDataset& dataset) {
    if (dataset.instances.empty()) throw EmptyDataset("evaluate_accuracy: empty dataset");
    int correct = 0;
    for (const auto& inst : dataset.instances)
        if (predict(model, dataset.adjacency, inst.features).label == inst.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(dataset.instances.size());
}

Matrix augmented_laplacian_dense(const AdjacencyMatrix& a) {
    const int n = a.n_nodes();
    Matrix at = a.dense() + Matrix::Identity(n, n);
    Vector dinv = at.rowwise().sum().array().rsqrt();
    return dinv.asDiagonal() * at * dinv.asDiagonal();
}

ad::Var gcn_loss_expr(ad::Tape& tape, const std::vector<ad::Var>& params,
                      const Matrix& laplacian, const GraphDataset& data) {
    ad::Var w0 = params[0], w1 = params[1], head_w = params[2], head_b = params[3];
    const int n = static_cast<int>(data.instances.size());
    const int n_nodes = static_cast<int>(laplacian.rows());
    auto vl = tape.constant(laplacian);
    Matrix pool_row = Matrix::Constant(1, n_nodes, 1.0 / n_nodes);
    auto vpool = tape.constant(pool_row);

    ad::Var total{};
    for (int i = 0; i < n; ++i) {
        auto vx = tape.constant(data.instances[i].features);
        auto h = tape.matmul(vl, tape.matmul(tape.relu(tape.matmul(vl, tape.matmul(vx, w0))), w1));
        auto pooled = tape.matmul(vpool, h);  // 1 x hidden
        auto logits = tape.add_rowvec(tape.matmul(pooled, head_w), head_b);
        auto logp = tape.log_softmax_rows(logits);
        Matrix target = Matrix::Zero(1, 2);
        target(0, data.instances[i].label > 0 ? 1 : 0) = -1.0;
        auto ce = tape.sum(tape.mul(tape.constant(target), logp));
        total = i == 0 ? ce : tape.add(total, ce);
    }
    return tape.scale(total, 1.0 / static_cast<double>(n));
}

GcnModel train_gcn_baseline(const GraphDataset& train, int hidden_dim, int epochs, double lr,
                            std::uint64_t seed) {
    const int n = static_cast<int>(train.instances.size());
    if (n < 2) throw SingleClassTrainingSet("need at least 2 training instances");
    bool has_pos = false, has_neg = false;
    for (const auto& inst : train.instances) (inst.label > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw SingleClassTrainingSet("training set contains a single class");

    const int d = train.feat_dim();
    GcnModel model;
    model.laplacian = augmented_laplacian_dense(train.adjacency);
    std::mt19937_64 rng(seed ^ 0x67636eull);
    std::uniform_real_distribution<double> init(-0.1, 0.1);
    model.w0 = Matrix::NullaryExpr(d, hidden_dim, [&] { return init(rng); });
    model.w1 = Matrix::NullaryExpr(hidden_dim, hidden_dim, [&] { return init(rng); });
    model.head_w = Matrix::NullaryExpr(hidden_dim, 2, [&] { return init(rng); });
    model.head_b = Matrix::Zero(1, 2);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        ad::Tape tape;
        auto vw0 = tape.param(model.w0);
        auto vw1 = tape.param(model.w1);
        auto vhw = tape.param(model.head_w);
        auto vhb = tape.param(model.head_b);
        auto loss = gcn_loss_expr(tape, {vw0, vw1, vhw, vhb}, model.laplacian, train);
        tape.backward(loss);
        model.w0 -= lr * vw0.grad();
        model.w1 -= lr * vw1.grad();
        model.head_w -= lr * vhw.grad();
        model.head_b -= lr * vhb.grad();
    }
    return model;
}

Prediction gcn_predict(const GcnModel& model, const Matrix& x) {
    const Matrix h =
        model.laplacian * ((model.laplacian * (x * model.w0)).cwiseMax(0.0) * model.w1);
    Eigen::RowVectorXd pooled = h.colwise().mean();
    Eigen::RowVector2d z = pooled * model.head_w + model.head_b.row(0);
    Eigen::RowVector2d p = softmax2(z);
    return Prediction{z(1) >= z(0) ? 1 : -1, p};
}

double gcn_accuracy(const GcnModel& model, const GraphDataset& dataset) {
    if (dataset.instances.empty()) throw EmptyDataset("gcn_accuracy: empty dataset");
    int correct = 0;
    for (const auto& inst : dataset.instances)
        if (gcn_predict(model, inst.features).label == inst.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(dataset.instances.size());
}

double gcn_loss(const GcnModel& model, const GraphDataset& dataset) {
    ad::Tape tape;
    auto vw0 = tape.param(model.w0);
    auto vw1 = tape.param(model.w1);
    auto vhw = tape.param(model.head_w);
    auto vhb = tape.param(model.head_b);
    return gcn_loss_expr(tape, {vw0, vw1, vhw, vhb}, model.laplacian, dataset).value()(0, 0);
}

}  // namespace magnet
