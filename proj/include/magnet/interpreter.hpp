#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "magnet/autodiff.hpp"
#include "magnet/estimator.hpp"
#include "magnet/graph.hpp"

namespace magnet {

enum class TargetMode { FixedFull, MaskedFeatures };

struct ExplanationConfig {
    double omega_start = 1.0;
    double omega_end = 0.1;
    double lambda_edge = 0.005;
    double lambda_feature = 0.1;
    int mc_samples = 4;
    int iterations = 300;
    double step_size = 0.05;  // adaptive-moment step
    double degree_floor = 1e-8;
    TargetMode target_mode = TargetMode::FixedFull;
    std::uint64_t seed = 0;
};

struct ExplanationParams {
    Vector psi;      // one logit per adjacency edge, upper-triangle order
    Vector b_tilde;  // feat_dim feature logits
    ExplanationConfig config;
};

struct Explanation {
    std::vector<double> edge_scores;    // sigmoid(psi), per adjacency edge
    std::vector<double> feature_scores; // sigmoid(b_tilde)
    std::vector<std::pair<int, int>> kept_edges;
    std::vector<int> kept_nodes;
    std::vector<int> kept_features;
    std::vector<double> loss_trajectory;
};

// Concrete relaxation of a Bernoulli edge draw; u is clamped away from {0,1}.
double concrete_edge_sample(double psi, double omega, double u);

// Full estimator forward pass under a soft edge mask and feature mask;
// value agrees exactly with the differentiable path used by the optimizer.
Eigen::RowVector2d masked_prediction(const MaGNetModel& model, const AdjacencyMatrix& adjacency,
                                     const Matrix& x, const Matrix& edge_mask,
                                     const Vector& feature_mask, double degree_floor = 1e-8);

// Differentiable objective over {psi, b_tilde}. noise columns hold one uniform
// draw per edge; an empty noise matrix means deterministic soft masks sigmoid(psi).
ad::Var interpretation_loss_expr(ad::Tape& tape, ad::Var psi, ad::Var b_tilde,
                                 const MaGNetModel& model, const AdjacencyMatrix& adjacency,
                                 const std::vector<Matrix>& features,
                                 const std::vector<Eigen::RowVector2d>& targets,
                                 const Matrix& noise, double omega, double lambda_edge,
                                 double lambda_feature, double degree_floor);

double interpretation_objective(const MaGNetModel& model, const GraphDataset& subset,
                                const ExplanationParams& params, double omega,
                                const Matrix& noise);

std::pair<ExplanationParams, std::vector<double>> optimize_explanation(
    const MaGNetModel& model, const GraphDataset& subset, const ExplanationConfig& config);

Explanation threshold_explanation(const ExplanationParams& params,
                                  const AdjacencyMatrix& adjacency, int feat_dim,
                                  double edge_threshold = 0.5, double feature_threshold = 0.5,
                                  std::optional<int> top_m_nodes = std::nullopt);

}  // namespace magnet
