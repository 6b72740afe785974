#include "magnet/synth.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace magnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index * 0x2545F4914F6CDD1Dull + 1)));
}

Vector sample_gp(const std::vector<double>& grid, const GPKernelConfig& cfg,
                 std::mt19937_64& rng) {
    if (grid.empty()) throw InvalidParams("sample_gp: empty grid");
    const int p = static_cast<int>(grid.size());
    Matrix k(p, p);
    const double inv_l2 = 1.0 / (cfg.lengthscale * cfg.lengthscale);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            const double d = grid[i] - grid[j];
            k(i, j) = cfg.sigma * cfg.sigma * std::exp(-d * d * inv_l2);
        }
    k.diagonal().array() += cfg.jitter;
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success)
        throw CholeskyFailure("kernel matrix not positive definite; increase jitter");
    std::normal_distribution<double> stdnorm(0.0, 1.0);
    Vector z(p);
    for (int i = 0; i < p; ++i) z(i) = stdnorm(rng);
    return llt.matrixL() * z;
}

int label_rule_linear(const Matrix& x, const std::vector<int>& v0, double noise) {
    if (v0.empty()) throw InvalidParams("label_rule_linear: empty important set");
    double total = 0.0;
    for (int i : v0) total += x.row(i).sum();
    const double stat = total / static_cast<double>(v0.size()) + noise;
    return stat > 0.0 ? 1 : -1;
}

int label_rule_nonlinear(const Matrix& x, const std::vector<int>& v0, int p, double noise) {
    if (p < 3) throw InvalidParams("label_rule_nonlinear: feat_dim must be >= 3");
    if (v0.empty()) throw InvalidParams("label_rule_nonlinear: empty important set");
    Eigen::RowVectorXd colmean = Eigen::RowVectorXd::Zero(p);
    for (int i : v0) colmean += x.row(i);
    colmean /= static_cast<double>(v0.size());

    // block selectors: first m, middle m starting at m, last m coordinates
    const int m = p / 3;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int t = 0; t < m; ++t) s1 += colmean(t);
    for (int t = m; t < 2 * m; ++t) s2 += colmean(t);
    for (int t = p - m; t < p; ++t) s3 += colmean(t) * colmean(t) * colmean(t);
    const double stat = std::sin(s1) * std::cos(s2) + s3 + noise;
    return stat > 0.0 ? 1 : -1;
}

namespace {

// Pearson correlation; constant vectors correlate to 0 by convention.
double pearson(const Vector& a, const Vector& b) {
    const double ma = a.mean(), mb = b.mean();
    const Vector ca = a.array() - ma, cb = b.array() - mb;
    const double va = ca.squaredNorm(), vb = cb.squaredNorm();
    if (va == 0.0 || vb == 0.0) return 0.0;
    return ca.dot(cb) / std::sqrt(va * vb);
}

}  // namespace

AdjacencyMatrix correlation_adjacency(const std::vector<Matrix>& dataset_features,
                                      double target_density, std::uint64_t /*seed*/) {
    if (dataset_features.empty()) throw InvalidParams("correlation_adjacency: no instances");
    if (!(target_density > 0.0 && target_density <= 1.0))
        throw InvalidParams("correlation_adjacency: target_density outside (0,1]");
    const int n_nodes = static_cast<int>(dataset_features[0].rows());
    const int p = static_cast<int>(dataset_features[0].cols());
    const int n_inst = static_cast<int>(dataset_features.size());
    if (n_inst < 2 && p < 2)
        throw InvalidParams("correlation_adjacency: need >= 2 instances or feat_dim >= 2");

    // flatten each node's features across instances
    std::vector<Vector> flat(n_nodes, Vector(static_cast<Eigen::Index>(n_inst) * p));
    for (int v = 0; v < n_nodes; ++v)
        for (int i = 0; i < n_inst; ++i)
            flat[v].segment(static_cast<Eigen::Index>(i) * p, p) =
                dataset_features[i].row(v).transpose();

    struct Pair {
        int i, j;
        double abs_rho;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n_nodes) * (n_nodes - 1) / 2);
    Matrix rho = Matrix::Zero(n_nodes, n_nodes);
    for (int i = 0; i < n_nodes; ++i)
        for (int j = i + 1; j < n_nodes; ++j) {
            const double r = pearson(flat[i], flat[j]);
            rho(i, j) = rho(j, i) = r;
            pairs.push_back({i, j, std::abs(r)});
        }

    // top-density fraction of pairs by |rho|, ties by lexicographic pair order
    std::vector<int> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (pairs[a].abs_rho != pairs[b].abs_rho) return pairs[a].abs_rho > pairs[b].abs_rho;
        return std::make_pair(pairs[a].i, pairs[a].j) < std::make_pair(pairs[b].i, pairs[b].j);
    });
    const std::size_t n_keep = static_cast<std::size_t>(
        std::llround(target_density * static_cast<double>(pairs.size())));
    std::vector<std::pair<int, int>> edges;
    for (std::size_t k = 0; k < std::min(n_keep, order.size()); ++k)
        edges.emplace_back(pairs[order[k]].i, pairs[order[k]].j);

    // repair isolated nodes with their strongest partner
    std::vector<int> deg(n_nodes, 0);
    for (auto [i, j] : edges) {
        ++deg[i];
        ++deg[j];
    }
    for (int v = 0; v < n_nodes; ++v) {
        if (deg[v] > 0) continue;
        int best = v == 0 ? 1 : 0;
        for (int u = 0; u < n_nodes; ++u)
            if (u != v && std::abs(rho(v, u)) > std::abs(rho(v, best))) best = u;
        edges.emplace_back(std::min(v, best), std::max(v, best));
        ++deg[v];
        ++deg[best];
    }
    return AdjacencyMatrix(n_nodes, std::move(edges));
}

GraphDataset generate_setting1(int n, int n_nodes, int n_important, int feat_dim,
                               double noise_sd, std::uint64_t seed, double target_density) {
    if (n < 1 || feat_dim < 1 || n_important <= 0 || n_important >= n_nodes)
        throw InvalidParams("generate_setting1: bad parameters");

    std::vector<int> v0(n_important);
    std::iota(v0.begin(), v0.end(), 0);

    GraphDataset ds;
    ds.instances.reserve(n);
    for (int i = 0; i < n; ++i) {
        auto rng = substream(seed, static_cast<std::uint64_t>(i) + 1);
        std::normal_distribution<double> imp(0.0, std::sqrt(0.1));
        std::uniform_real_distribution<double> other(0.0, 1.0);
        Matrix x(n_nodes, feat_dim);
        for (int v = 0; v < n_nodes; ++v)
            for (int t = 0; t < feat_dim; ++t)
                x(v, t) = v < n_important ? imp(rng) : other(rng);
        std::normal_distribution<double> noise(0.0, noise_sd);
        const int label = label_rule_linear(x, v0, noise(rng));
        ds.instances.push_back({std::move(x), label});
    }
    std::vector<Matrix> feats;
    feats.reserve(n);
    for (const auto& inst : ds.instances) feats.push_back(inst.features);
    ds.adjacency = correlation_adjacency(feats, target_density, seed);
    ds.important_nodes = std::move(v0);
    ds.meta = {1, seed, noise_sd, target_density, "important nodes are indices 0..m-1"};
    return ds;
}

GraphDataset generate_setting2(int n, int n_nodes, int n_important, int feat_dim,
                               double noise_sd, const GPKernelConfig& kernel_important,
                               const GPKernelConfig& kernel_other, std::uint64_t seed,
                               double target_density) {
    if (n < 1 || feat_dim < 3 || n_important <= 0 || n_important >= n_nodes)
        throw InvalidParams("generate_setting2: bad parameters");

    std::vector<int> v0(n_important);
    std::iota(v0.begin(), v0.end(), 0);

    GraphDataset ds;
    ds.instances.reserve(n);
    for (int i = 0; i < n; ++i) {
        auto rng = substream(seed, static_cast<std::uint64_t>(i) + 1);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> grid(feat_dim);
        for (auto& g : grid) g = unif(rng);
        std::sort(grid.begin(), grid.end());

        Matrix x(n_nodes, feat_dim);
        for (int v = 0; v < n_nodes; ++v) {
            const auto& cfg = v < n_important ? kernel_important : kernel_other;
            x.row(v) = sample_gp(grid, cfg, rng).transpose();
        }
        std::normal_distribution<double> noise(0.0, noise_sd);
        const int label = label_rule_nonlinear(x, v0, feat_dim, noise(rng));
        ds.instances.push_back({std::move(x), label});
    }
    std::vector<Matrix> feats;
    feats.reserve(n);
    for (const auto& inst : ds.instances) feats.push_back(inst.features);
    ds.adjacency = correlation_adjacency(feats, target_density, seed);
    ds.important_nodes = std::move(v0);
    ds.meta = {2, seed, noise_sd, target_density,
               "grid shared within instance; middle block starts at floor(p/3)"};
    return ds;
}

}  // namespace magnet
