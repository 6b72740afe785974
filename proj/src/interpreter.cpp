#include "magnet/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magnet/synth.hpp"

namespace magnet {

double concrete_edge_sample(double psi, double omega, double u) {
    u = std::clamp(u, 1e-12, 1.0 - 1e-12);
    const double z = (std::log(u) - std::log1p(-u) + psi) / omega;
    return 1.0 / (1.0 + std::exp(-z));
}

namespace {

// shared tail of the forward pass: soft Laplacian -> fused embedding -> logits
ad::Var forward_logits(ad::Tape& tape, ad::Var laplacian, ad::Var masked_x,
                       const MaGNetModel& model, int n_nodes) {
    const double pool_scale = model.config.pooling == Pooling::Mean
                                  ? 1.0 / static_cast<double>(n_nodes)
                                  : 1.0;
    auto pool_row = tape.constant(Matrix::Constant(1, n_nodes, pool_scale));
    auto actor_w = tape.constant(model.actor_w);

    ad::Var fused{};
    ad::Var power = masked_x;
    for (int k = 0; k < model.config.k_orders; ++k) {
        power = tape.matmul(laplacian, power);
        auto h = tape.matmul(tape.matmul(pool_row, power), actor_w);
        auto term = tape.scale(h, model.alphas[static_cast<std::size_t>(k)]);
        fused = k == 0 ? term : tape.add(fused, term);
    }

    const int d = static_cast<int>(model.actor_w.cols());
    Matrix grow = Matrix::Identity(d, d + 1);
    Matrix onerow = Matrix::Zero(1, d + 1);
    onerow(0, d) = 1.0;
    auto faug = tape.add(tape.matmul(fused, tape.constant(grow)), tape.constant(onerow));
    if (model.head.type == HeadType::Linear)
        return tape.matmul(faug, tape.constant(model.head.w1));

    const int hdim = static_cast<int>(model.head.w1.cols());
    auto hid = tape.relu(tape.matmul(faug, tape.constant(model.head.w1)));
    Matrix grow2 = Matrix::Identity(hdim, hdim + 1);
    Matrix onerow2 = Matrix::Zero(1, hdim + 1);
    onerow2(0, hdim) = 1.0;
    auto hidaug = tape.add(tape.matmul(hid, tape.constant(grow2)), tape.constant(onerow2));
    return tape.matmul(hidaug, tape.constant(model.head.w2));
}

ad::Var soft_laplacian(ad::Tape& tape, ad::Var edge_weights,
                       const std::vector<std::pair<int, int>>& edges, int n_nodes,
                       double degree_floor) {
    auto w = tape.scatter_symmetric(edge_weights, edges, n_nodes);
    auto deg = tape.matmul(w, tape.constant(Matrix::Ones(n_nodes, 1)));
    auto dinv = tape.pow_const(tape.add_scalar(deg, degree_floor), -0.5);
    return tape.mul(tape.matmul(dinv, tape.transpose(dinv)), w);
}

Matrix logit_matrix(const Matrix& u) {
    Matrix out = u;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double c = std::clamp(out(i), 1e-12, 1.0 - 1e-12);
        out(i) = std::log(c) - std::log1p(-c);
    }
    return out;
}

}  // namespace

ad::Var interpretation_loss_expr(ad::Tape& tape, ad::Var psi, ad::Var b_tilde,
                                 const MaGNetModel& model, const AdjacencyMatrix& adjacency,
                                 const std::vector<Matrix>& features,
                                 const std::vector<Eigen::RowVector2d>& targets,
                                 const Matrix& noise, double omega, double lambda_edge,
                                 double lambda_feature, double degree_floor) {
    const auto& edges = adjacency.edges();
    const int n_nodes = adjacency.n_nodes();
    const int n_inst = static_cast<int>(features.size());
    const int n_draws = noise.size() == 0 ? 1 : static_cast<int>(noise.cols());

    auto fmask = tape.sigmoid(b_tilde);  // 1 x feat_dim

    ad::Var ce_total{};
    bool first = true;
    for (int d = 0; d < n_draws; ++d) {
        ad::Var edge_w;
        if (noise.size() == 0) {
            edge_w = tape.sigmoid(psi);
        } else {
            auto shifted = tape.add(psi, tape.constant(logit_matrix(noise.col(d))));
            edge_w = tape.sigmoid(tape.scale(shifted, 1.0 / omega));
        }
        auto lap = soft_laplacian(tape, edge_w, edges, n_nodes, degree_floor);
        for (int i = 0; i < n_inst; ++i) {
            auto xm = tape.row_scale(tape.constant(features[i]), fmask);
            auto logits = forward_logits(tape, lap, xm, model, n_nodes);
            auto logq = tape.log_softmax_rows(logits);
            Matrix neg_target = -Matrix(targets[i]);
            auto ce = tape.sum(tape.mul(tape.constant(neg_target), logq));
            ce_total = first ? ce : tape.add(ce_total, ce);
            first = false;
        }
    }
    auto loss = tape.scale(ce_total, 1.0 / static_cast<double>(n_draws * n_inst));
    if (lambda_edge != 0.0)
        loss = tape.add(loss, tape.scale(tape.sum(tape.sigmoid(psi)), lambda_edge));
    if (lambda_feature != 0.0)
        loss = tape.add(loss, tape.scale(tape.sum(tape.sigmoid(b_tilde)), lambda_feature));
    return loss;
}

Eigen::RowVector2d masked_prediction(const MaGNetModel& model, const AdjacencyMatrix& adjacency,
                                     const Matrix& x, const Matrix& edge_mask,
                                     const Vector& feature_mask, double degree_floor) {
    if (x.rows() != adjacency.n_nodes() || feature_mask.size() != x.cols())
        throw DimensionMismatch("masked_prediction: shape mismatch");
    const auto& edges = adjacency.edges();
    Vector ew(static_cast<Eigen::Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e)
        ew(static_cast<Eigen::Index>(e)) = edge_mask(edges[e].first, edges[e].second);

    ad::Tape tape;
    auto vew = tape.constant(ew);
    auto lap = soft_laplacian(tape, vew, edges, adjacency.n_nodes(), degree_floor);
    auto xm = tape.row_scale(tape.constant(x), tape.constant(feature_mask.transpose()));
    auto logits = forward_logits(tape, lap, xm, model, adjacency.n_nodes());
    auto probs = tape.softmax_rows(logits);
    return probs.value().row(0);
}

namespace {

std::vector<Eigen::RowVector2d> compute_targets(const MaGNetModel& model,
                                                const GraphDataset& subset,
                                                TargetMode mode, const Vector& b_tilde,
                                                double degree_floor) {
    std::vector<Eigen::RowVector2d> targets;
    targets.reserve(subset.instances.size());
    if (mode == TargetMode::FixedFull) {
        for (const auto& inst : subset.instances)
            targets.push_back(predict(model, subset.adjacency, inst.features).probabilities);
    } else {
        const int n = subset.n_nodes();
        const Matrix ones = Matrix::Ones(n, n);
        const Vector fmask = (1.0 / (1.0 + (-b_tilde.array()).exp())).matrix();
        for (const auto& inst : subset.instances)
            targets.push_back(masked_prediction(model, subset.adjacency, inst.features, ones,
                                                fmask, degree_floor));
    }
    return targets;
}

}  // namespace

double interpretation_objective(const MaGNetModel& model, const GraphDataset& subset,
                                const ExplanationParams& params, double omega,
                                const Matrix& noise) {
    std::vector<Matrix> feats;
    feats.reserve(subset.instances.size());
    for (const auto& inst : subset.instances) feats.push_back(inst.features);
    auto targets = compute_targets(model, subset, params.config.target_mode, params.b_tilde,
                                   params.config.degree_floor);
    ad::Tape tape;
    auto vpsi = tape.param(params.psi);
    auto vb = tape.param(params.b_tilde.transpose());
    auto loss = interpretation_loss_expr(tape, vpsi, vb, model, subset.adjacency, feats, targets,
                                         noise, omega, params.config.lambda_edge,
                                         params.config.lambda_feature, params.config.degree_floor);
    return loss.value()(0, 0);
}

std::pair<ExplanationParams, std::vector<double>> optimize_explanation(
    const MaGNetModel& model, const GraphDataset& subset, const ExplanationConfig& config) {
    const auto& edges = subset.adjacency.edges();
    const int n_edges = static_cast<int>(edges.size());
    const int feat_dim = subset.feat_dim();

    ExplanationParams params;
    params.config = config;
    params.psi = Vector::Zero(n_edges);
    params.b_tilde = Vector::Zero(feat_dim);

    std::vector<Matrix> feats;
    feats.reserve(subset.instances.size());
    for (const auto& inst : subset.instances) feats.push_back(inst.features);

    auto fixed_targets = config.target_mode == TargetMode::FixedFull
                             ? compute_targets(model, subset, TargetMode::FixedFull,
                                               params.b_tilde, config.degree_floor)
                             : std::vector<Eigen::RowVector2d>{};

    // adaptive-moment descent state over [psi ; b_tilde]
    const int n_params = n_edges + feat_dim;
    Vector m = Vector::Zero(n_params), v = Vector::Zero(n_params);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    std::vector<double> trajectory;
    trajectory.reserve(config.iterations);
    const double decay = config.iterations > 1
                             ? std::pow(config.omega_end / config.omega_start,
                                        1.0 / static_cast<double>(config.iterations - 1))
                             : 1.0;
    double omega = config.omega_start;

    for (int iter = 0; iter < config.iterations; ++iter, omega *= decay) {
        // common random numbers: draws depend only on (seed, iteration)
        auto rng = substream(config.seed, static_cast<std::uint64_t>(iter) + 1);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Matrix noise(n_edges, std::max(1, config.mc_samples));
        for (Eigen::Index c = 0; c < noise.cols(); ++c)
            for (Eigen::Index r = 0; r < noise.rows(); ++r)
                noise(r, c) = std::clamp(unif(rng), 1e-12, 1.0 - 1e-12);
        if (config.mc_samples == 0) noise.resize(0, 0);

        auto targets = config.target_mode == TargetMode::FixedFull
                           ? fixed_targets
                           : compute_targets(model, subset, TargetMode::MaskedFeatures,
                                             params.b_tilde, config.degree_floor);

        ad::Tape tape;
        auto vpsi = tape.param(params.psi);
        auto vb = tape.param(params.b_tilde.transpose());
        auto loss = interpretation_loss_expr(tape, vpsi, vb, model, subset.adjacency, feats,
                                             targets, noise, omega, config.lambda_edge,
                                             config.lambda_feature, config.degree_floor);
        tape.backward(loss);
        trajectory.push_back(loss.value()(0, 0));

        Vector grad(n_params);
        grad.head(n_edges) = vpsi.grad();
        grad.tail(feat_dim) = vb.grad().transpose();

        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1, iter + 1);
        const double bc2 = 1.0 - std::pow(beta2, iter + 1);
        Vector step = (m / bc1).array() / ((v / bc2).array().sqrt() + adam_eps);
        params.psi -= config.step_size * step.head(n_edges);
        params.b_tilde -= config.step_size * step.tail(feat_dim);
    }
    return {std::move(params), std::move(trajectory)};
}

Explanation threshold_explanation(const ExplanationParams& params,
                                  const AdjacencyMatrix& adjacency, int feat_dim,
                                  double edge_threshold, double feature_threshold,
                                  std::optional<int> top_m_nodes) {
    const auto& edges = adjacency.edges();
    Explanation out;
    out.edge_scores.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
        out.edge_scores[e] = 1.0 / (1.0 + std::exp(-params.psi(static_cast<Eigen::Index>(e))));

    out.feature_scores.resize(static_cast<std::size_t>(feat_dim));
    for (int t = 0; t < feat_dim; ++t) {
        out.feature_scores[static_cast<std::size_t>(t)] =
            1.0 / (1.0 + std::exp(-params.b_tilde(t)));
        if (out.feature_scores[static_cast<std::size_t>(t)] >= feature_threshold)
            out.kept_features.push_back(t);
    }

    std::vector<double> node_score(static_cast<std::size_t>(adjacency.n_nodes()), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        node_score[static_cast<std::size_t>(i)] =
            std::max(node_score[static_cast<std::size_t>(i)], out.edge_scores[e]);
        node_score[static_cast<std::size_t>(j)] =
            std::max(node_score[static_cast<std::size_t>(j)], out.edge_scores[e]);
        if (out.edge_scores[e] >= edge_threshold) out.kept_edges.emplace_back(i, j);
    }

    if (top_m_nodes) {
        std::vector<int> order(node_score.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (node_score[static_cast<std::size_t>(a)] != node_score[static_cast<std::size_t>(b)])
                return node_score[static_cast<std::size_t>(a)] >
                       node_score[static_cast<std::size_t>(b)];
            return a < b;  // documented tie rule
        });
        const int m = std::min<int>(*top_m_nodes, static_cast<int>(order.size()));
        out.kept_nodes.assign(order.begin(), order.begin() + m);
        std::sort(out.kept_nodes.begin(), out.kept_nodes.end());
    } else {
        std::vector<bool> keep(node_score.size(), false);
        for (auto [i, j] : out.kept_edges) keep[static_cast<std::size_t>(i)] =
                                               keep[static_cast<std::size_t>(j)] = true;
        for (std::size_t v = 0; v < keep.size(); ++v)
            if (keep[v]) out.kept_nodes.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace magnet
