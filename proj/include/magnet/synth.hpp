#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "magnet/graph.hpp"

namespace magnet {

struct SynthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidParams : SynthError {
    using SynthError::SynthError;
};
struct CholeskyFailure : SynthError {
    using SynthError::SynthError;
};

struct Instance {
    Matrix features;  // n_nodes x feat_dim
    int label;        // -1 or +1
};

struct DatasetMeta {
    int setting = 0;
    std::uint64_t seed = 0;
    double noise_sd = 0.1;
    double target_density = 0.2;
    std::string notes;  // generation conventions, e.g. middle-block start index
};

struct GraphDataset {
    AdjacencyMatrix adjacency{2, {{0, 1}}};
    std::vector<Instance> instances;
    std::vector<int> important_nodes;
    DatasetMeta meta;

    int n_nodes() const { return adjacency.n_nodes(); }
    int feat_dim() const {
        return instances.empty() ? 0 : static_cast<int>(instances[0].features.cols());
    }
};

struct GPKernelConfig {
    double sigma = 1.0;
    double lengthscale = 1.0;
    double jitter = 1e-6;
};

// Counter-based substream: each instance owns an independent generator
// derived from (seed, index), so generation order never matters.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

GraphDataset generate_setting1(int n, int n_nodes, int n_important, int feat_dim,
                               double noise_sd, std::uint64_t seed,
                               double target_density = 0.2);

GraphDataset generate_setting2(int n, int n_nodes, int n_important, int feat_dim,
                               double noise_sd, const GPKernelConfig& kernel_important,
                               const GPKernelConfig& kernel_other, std::uint64_t seed,
                               double target_density = 0.2);

// Draw from MVN(0, K + jitter*I) with K_tt' = sigma^2 exp(-|x_t-x_t'|^2 / l^2).
Vector sample_gp(const std::vector<double>& grid, const GPKernelConfig& cfg,
                 std::mt19937_64& rng);

int label_rule_linear(const Matrix& x, const std::vector<int>& v0, double noise);
int label_rule_nonlinear(const Matrix& x, const std::vector<int>& v0, int p, double noise);

AdjacencyMatrix correlation_adjacency(const std::vector<Matrix>& dataset_features,
                                      double target_density, std::uint64_t seed);

}  // namespace magnet
