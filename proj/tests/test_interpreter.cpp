#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "magnet/interpreter.hpp"

using namespace magnet;

namespace {

GraphDataset planted_separable(int n, int n_nodes, int feat_dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<std::pair<int, int>> edges;
    for (int v = 0; v + 1 < n_nodes; ++v) edges.emplace_back(v, v + 1);
    edges.emplace_back(0, n_nodes - 1);
    GraphDataset ds;
    ds.adjacency = AdjacencyMatrix(n_nodes, std::move(edges));
    for (int i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        Matrix x(n_nodes, feat_dim);
        for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = 0.5 * label + noise(rng);
        ds.instances.push_back({std::move(x), label});
    }
    return ds;
}

// single-order model whose logits depend on edge (0,1) and ignore edge (2,3):
// graph is two disjoint pairs, features light up only nodes 0 and 1
struct PlantedEdge {
    MaGNetModel model;
    GraphDataset data;
};

PlantedEdge planted_edge_problem() {
    PlantedEdge p;
    p.data.adjacency = AdjacencyMatrix(4, {{0, 1}, {2, 3}});
    Matrix x(4, 1);
    x << 1.0, 1.0, 0.0, 0.0;
    p.data.instances.push_back({x, 1});

    p.model.config.k_orders = 1;
    p.model.actor_w = Matrix::Identity(1, 1);
    p.model.alphas = {1.0};
    p.model.head.type = HeadType::Linear;
    p.model.head.w1 = Matrix::Zero(2, 2);
    p.model.head.w1(0, 1) = 10.0;  // logit for class +1 grows with the pooled value
    return p;
}

Matrix fixed_noise(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = unif(rng);
    return m;
}

}  // namespace

TEST_CASE("concrete relaxation closed forms") {
    auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    // u = 0.5 contributes zero logistic noise
    CHECK(concrete_edge_sample(1.3, 0.7, 0.5) == doctest::Approx(sigmoid(1.3 / 0.7)).epsilon(1e-12));
    CHECK(concrete_edge_sample(0.0, 1.0, 0.5) == doctest::Approx(0.5));
    // tiny temperature hardens the draw
    CHECK(concrete_edge_sample(2.0, 0.01, 0.5) > 1.0 - 1e-10);
    CHECK(concrete_edge_sample(-2.0, 0.01, 0.5) < 1e-10);
    // boundary noise is clamped, never NaN or infinite
    for (double u : {0.0, 1.0}) {
        const double v = concrete_edge_sample(0.3, 0.5, u);
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("identity masks reproduce the plain prediction") {
    auto ds = planted_separable(12, 6, 3, 5);
    ActorConfig cfg;
    cfg.seed = 5;
    auto model = train_magnet(ds, cfg);
    Matrix ones_mask = ds.adjacency.dense();
    Vector feat_mask = Vector::Ones(3);
    for (const auto& inst : ds.instances) {
        auto full = predict(model, ds.adjacency, inst.features).probabilities;
        auto masked =
            masked_prediction(model, ds.adjacency, inst.features, ones_mask, feat_mask, 0.0);
        CHECK((masked - full).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("an all-zero edge mask leaves only the head bias") {
    auto ds = planted_separable(4, 5, 3, 7);
    ActorConfig cfg;
    cfg.seed = 7;
    auto model = train_magnet(ds, cfg);
    Matrix zero_mask = Matrix::Zero(5, 5);
    auto probs = masked_prediction(model, ds.adjacency, ds.instances[0].features, zero_mask,
                                   Vector::Ones(3));
    const Eigen::RowVector2d bias = model.head.w1.row(model.head.w1.rows() - 1);
    Eigen::RowVector2d expect;
    expect << std::exp(bias(0)), std::exp(bias(1));
    expect /= expect.sum();
    CHECK((probs - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("masked prediction matches a dense oracle on random soft masks") {
    auto ds = planted_separable(6, 6, 3, 11);
    ActorConfig cfg;
    cfg.seed = 11;
    auto model = train_magnet(ds, cfg);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    const double floor = 1e-8;
    for (int trial = 0; trial < 5; ++trial) {
        Matrix w = Matrix::Zero(6, 6);
        for (auto [i, j] : ds.adjacency.edges()) w(i, j) = w(j, i) = unif(rng);
        Vector fmask(3);
        for (int t = 0; t < 3; ++t) fmask(t) = unif(rng);

        Eigen::VectorXd deg = w.rowwise().sum();
        Eigen::VectorXd dinv = (deg.array() + floor).pow(-0.5);
        Matrix lw = dinv.asDiagonal() * w * dinv.asDiagonal();

        const auto& x = ds.instances[trial].features;
        Matrix xm = x * fmask.asDiagonal();
        Matrix power = xm;
        Eigen::RowVector2d expect = model.head.w1.row(model.head.w1.rows() - 1);
        Eigen::RowVectorXd fused = Eigen::RowVectorXd::Zero(3);
        for (int k = 0; k < cfg.k_orders; ++k) {
            power = lw * power;
            fused += model.alphas[k] *
                     Eigen::RowVectorXd((power * model.actor_w).colwise().mean());
        }
        expect += fused * model.head.w1.topRows(model.head.w1.rows() - 1);
        Eigen::RowVector2d probs;
        const double m = expect.maxCoeff();
        probs << std::exp(expect(0) - m), std::exp(expect(1) - m);
        probs /= probs.sum();

        auto got = masked_prediction(model, ds.adjacency, x, w, fmask, floor);
        CHECK((got - probs).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("saturated open masks recover the target entropy at zero penalty") {
    auto ds = planted_separable(5, 5, 3, 17);
    ActorConfig cfg;
    cfg.seed = 17;
    auto model = train_magnet(ds, cfg);
    ExplanationParams params;
    params.psi = Vector::Constant(static_cast<int>(ds.adjacency.edges().size()), 40.0);
    params.b_tilde = Vector::Constant(3, 40.0);
    params.config.lambda_edge = 0.0;
    params.config.lambda_feature = 0.0;
    const double obj = interpretation_objective(model, ds, params, 0.5, Matrix());
    double entropy = 0.0;
    for (const auto& inst : ds.instances) {
        auto p = predict(model, ds.adjacency, inst.features).probabilities;
        for (int t = 0; t < 2; ++t)
            if (p(t) > 0.0) entropy -= p(t) * std::log(p(t));
    }
    entropy /= static_cast<double>(ds.instances.size());
    CHECK(obj == doctest::Approx(entropy).epsilon(1e-6));
}

TEST_CASE("the full mask is a gibbs minimizer among hard masks") {
    auto ds = planted_separable(6, 5, 3, 19);
    ActorConfig cfg;
    cfg.seed = 19;
    auto model = train_magnet(ds, cfg);
    const int n_edges = static_cast<int>(ds.adjacency.edges().size());
    ExplanationParams full;
    full.psi = Vector::Constant(n_edges, 40.0);
    full.b_tilde = Vector::Constant(3, 40.0);
    full.config.lambda_edge = 0.0;
    full.config.lambda_feature = 0.0;
    const double best = interpretation_objective(model, ds, full, 0.5, Matrix());
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        ExplanationParams mask = full;
        for (int e = 0; e < n_edges; ++e) mask.psi(e) = rng() % 2 == 0 ? 40.0 : -40.0;
        const double obj = interpretation_objective(model, ds, mask, 0.5, Matrix());
        CHECK(obj >= best - 1e-12);
    }
}

TEST_CASE("interpretation gradients pass finite differences") {
    for (auto head : {HeadType::Linear, HeadType::Mlp}) {
        auto ds = planted_separable(3, 5, 3, 29);
        ActorConfig cfg;
        cfg.seed = 29;
        cfg.k_orders = 2;
        cfg.head_type = head;
        auto model = train_magnet(ds, cfg);
        const int n_edges = static_cast<int>(ds.adjacency.edges().size());
        std::vector<Matrix> feats;
        std::vector<Eigen::RowVector2d> targets;
        for (const auto& inst : ds.instances) {
            feats.push_back(inst.features);
            targets.push_back(predict(model, ds.adjacency, inst.features).probabilities);
        }
        Matrix noise = fixed_noise(n_edges, 2, 31);
        auto builder = [&](ad::Tape& t, const std::vector<ad::Var>& p) {
            return interpretation_loss_expr(t, p[0], p[1], model, ds.adjacency, feats, targets,
                                            noise, 0.7, 0.005, 0.1, 1e-8);
        };
        std::mt19937_64 rng(37);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        Matrix psi0(n_edges, 1), b0(1, 3);  // feature logits enter as a row
        for (Eigen::Index i = 0; i < psi0.size(); ++i) psi0(i) = unif(rng);
        for (Eigen::Index i = 0; i < b0.size(); ++i) b0(i) = unif(rng);
        CHECK(ad::grad_check(builder, {psi0, b0}) <= 1e-4);
    }
}

TEST_CASE("optimization drops every edge when the model ignores the graph") {
    auto ds = planted_separable(6, 5, 3, 41);
    ActorConfig cfg;
    cfg.seed = 41;
    auto model = train_magnet(ds, cfg);
    for (auto& a : model.alphas) a = 0.0;  // logits reduce to the head bias
    ExplanationConfig ec;
    ec.iterations = 200;
    ec.seed = 41;
    auto [params, traj] = optimize_explanation(model, ds, ec);
    for (Eigen::Index e = 0; e < params.psi.size(); ++e) CHECK(params.psi(e) < 0.0);
    auto expl = threshold_explanation(params, ds.adjacency, 3);
    CHECK(expl.kept_edges.empty());
    CHECK(expl.kept_nodes.empty());
}

TEST_CASE("optimization keeps the edge the model relies on") {
    auto p = planted_edge_problem();
    ExplanationConfig ec;
    ec.iterations = 300;
    ec.mc_samples = 8;
    ec.seed = 3;
    auto [params, traj] = optimize_explanation(p.model, p.data, ec);
    // edge order is [(0,1), (2,3)]
    CHECK(params.psi(0) > 0.0);
    CHECK(params.psi(1) < 0.0);
    auto expl = threshold_explanation(params, p.data.adjacency, 1);
    REQUIRE(expl.kept_edges.size() == 1);
    CHECK(expl.kept_edges[0] == std::pair<int, int>{0, 1});
    CHECK(expl.kept_nodes == std::vector<int>{0, 1});
}

TEST_CASE("optimization lowers the deterministic objective on the planted problem") {
    auto p = planted_edge_problem();
    ExplanationConfig ec;
    ec.iterations = 300;
    ec.mc_samples = 8;
    ec.seed = 9;
    auto [params, traj] = optimize_explanation(p.model, p.data, ec);
    REQUIRE(traj.size() == 300);
    for (double l : traj) CHECK(std::isfinite(l));

    ExplanationParams init;
    init.config = ec;
    init.psi = Vector::Zero(params.psi.size());
    init.b_tilde = Vector::Zero(params.b_tilde.size());
    const double before = interpretation_objective(p.model, p.data, init, ec.omega_end, Matrix());
    const double after = interpretation_objective(p.model, p.data, params, ec.omega_end, Matrix());
    CHECK(after < before);
}

TEST_CASE("explanation optimization is bit-deterministic") {
    auto ds = planted_separable(4, 5, 3, 43);
    ActorConfig cfg;
    cfg.seed = 43;
    auto model = train_magnet(ds, cfg);
    ExplanationConfig ec;
    ec.iterations = 50;
    ec.seed = 7;
    auto a = optimize_explanation(model, ds, ec);
    auto b = optimize_explanation(model, ds, ec);
    CHECK(a.first.psi == b.first.psi);
    CHECK(a.first.b_tilde == b.first.b_tilde);
    CHECK(a.second == b.second);
}

TEST_CASE("masked-feature targets are also accepted") {
    auto ds = planted_separable(4, 5, 3, 47);
    ActorConfig cfg;
    cfg.seed = 47;
    auto model = train_magnet(ds, cfg);
    ExplanationConfig ec;
    ec.iterations = 30;
    ec.seed = 47;
    ec.target_mode = TargetMode::MaskedFeatures;
    auto [params, traj] = optimize_explanation(model, ds, ec);
    CHECK(params.psi.size() == static_cast<Eigen::Index>(ds.adjacency.edges().size()));
    for (double l : traj) CHECK(std::isfinite(l));
}

TEST_CASE("thresholding keeps and drops whole graphs at the extremes") {
    AdjacencyMatrix tri(3, {{0, 1}, {0, 2}, {1, 2}});
    ExplanationParams params;
    params.b_tilde = Vector::Constant(4, 10.0);
    params.psi = Vector::Constant(3, 10.0);
    auto all = threshold_explanation(params, tri, 4);
    CHECK(all.kept_edges.size() == 3);
    CHECK(all.kept_nodes == std::vector<int>{0, 1, 2});
    CHECK(all.kept_features == std::vector<int>{0, 1, 2, 3});
    for (double s : all.edge_scores) CHECK(s > 0.99);

    params.psi = Vector::Constant(3, -10.0);
    params.b_tilde = Vector::Constant(4, -10.0);
    auto none = threshold_explanation(params, tri, 4);
    CHECK(none.kept_edges.empty());
    CHECK(none.kept_nodes.empty());
    CHECK(none.kept_features.empty());
}

TEST_CASE("top-m node selection breaks ties toward smaller indices") {
    AdjacencyMatrix tri(3, {{0, 1}, {0, 2}, {1, 2}});
    ExplanationParams params;
    params.psi = Vector::Constant(3, 2.0);  // every node has the same max incident score
    params.b_tilde = Vector::Zero(1);
    auto expl = threshold_explanation(params, tri, 1, 0.5, 0.5, 2);
    CHECK(expl.kept_nodes == std::vector<int>{0, 1});

    // distinct scores: node 2 carries the single strong edge (1,2)
    ExplanationParams distinct;
    distinct.psi = Vector(3);
    distinct.psi << -1.0, -1.0, 3.0;  // edges (0,1), (0,2), (1,2)
    distinct.b_tilde = Vector::Zero(1);
    auto top = threshold_explanation(distinct, tri, 1, 0.5, 0.5, 2);
    CHECK(top.kept_nodes == std::vector<int>{1, 2});
}
