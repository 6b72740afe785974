#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magnet/estimator.hpp"
#include "magnet/interpreter.hpp"
#include "magnet/synth.hpp"

namespace magnet {

// independent per-repetition seed derived from (seed, repetition index)
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// seeded-shuffle split; both halves share adjacency and important nodes
std::pair<GraphDataset, GraphDataset> split_dataset(const GraphDataset& dataset,
                                                    double train_fraction, std::uint64_t seed);

struct BenchmarkConfig {
    int setting = 1;
    int n = 250;
    int n_nodes = 30;
    int n_important = 20;
    int feat_dim = 25;
    double split = 0.7;
    int repeats = 10;
    std::uint64_t seed = 0;
    ActorConfig actor;
    ExplanationConfig explanation;
    bool run_interpretation = true;
    int interpretation_subset = 40;  // instances fed to the mask optimizer
    bool run_gcn_baseline = false;
    int threads = 1;
};

struct BenchmarkRow {
    int setting;
    int n;
    int n_nodes;
    int n_important;
    std::string method;
    std::string metric;
    double mean;
    double sd;
    int repeats;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
};

BenchmarkReport run_benchmark(const BenchmarkConfig& config);

// header: setting,n,nodes,important,method,metric,mean,sd,repeats
// numbers formatted to 6 significant digits, locale independent
std::string report_to_csv(const BenchmarkReport& report);
BenchmarkReport report_from_csv(const std::string& csv);

std::string report_to_text(const BenchmarkReport& report);
std::string report_to_svg(const BenchmarkReport& report);

}  // namespace magnet
