#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magnet/autodiff.hpp"
#include "magnet/graph.hpp"
#include "magnet/synth.hpp"

namespace magnet {

struct EstimatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingleClassTrainingSet : EstimatorError {
    using EstimatorError::EstimatorError;
};
struct EmptyDataset : EstimatorError {
    using EstimatorError::EstimatorError;
};

enum class Pooling { Mean, Sum };
enum class WMode { Identity, Trained };
enum class HeadType { Linear, Mlp };

struct ActorConfig {
    int k_orders = 3;
    WMode w_mode = WMode::Identity;
    Pooling pooling = Pooling::Mean;
    int critic_iters = 500;
    double critic_lr = 0.1;
    double epsilon_min = 1e-4;
    HeadType head_type = HeadType::Linear;
    int head_hidden = 16;
    int head_epochs = 300;
    double head_lr = 0.05;
    std::uint64_t seed = 0;
};

/// Softmax regression mapping a pooled embedding to two class logits.
/// Class index 0 <-> label -1, class index 1 <-> label +1.
struct CriticModel {
    Matrix weights;  // (embed_dim + 1) x 2, bias row last

    Eigen::RowVector2d logits(const Eigen::RowVectorXd& h) const;
    Eigen::RowVector2d probs(const Eigen::RowVectorXd& h) const;
    // tie at equal logits resolves to class +1
    int predict_class(const Eigen::RowVectorXd& h) const;
};

struct HeadModel {
    HeadType type = HeadType::Linear;
    Matrix w1;  // linear: (d+1) x 2 ; mlp: (d+1) x hidden
    Matrix w2;  // mlp only: (hidden+1) x 2

    Eigen::RowVector2d logits(const Eigen::RowVectorXd& h) const;
};

struct MaGNetModel {
    ActorConfig config;
    Matrix actor_w;  // feat_dim x embed_dim, identity by default
    std::vector<CriticModel> critics;
    std::vector<double> alphas;
    HeadModel head;
    std::vector<double> epsilons;     // diagnostics, one per order
    std::vector<double> final_betas;  // sample weights after the last round
};

Eigen::RowVectorXd actor_embed(const NormalizedLaplacian& l, const Matrix& x, const Matrix& w,
                               int k, Pooling pooling);

CriticModel train_critic(const Matrix& embeddings, const std::vector<int>& labels,
                         const std::vector<double>& sample_weights, int iters, double lr);

double weighted_error(const CriticModel& critic, const Matrix& embeddings,
                      const std::vector<int>& labels, const std::vector<double>& sample_weights,
                      double epsilon_min);

double fusion_weight(double epsilon);

std::vector<double> update_sample_weights(const std::vector<double>& weights, double alpha,
                                          const std::vector<bool>& misclassified);

Eigen::RowVectorXd fuse_embeddings(const std::vector<Eigen::RowVectorXd>& per_order,
                                   const std::vector<double>& alphas);

MaGNetModel train_magnet(const GraphDataset& train, const ActorConfig& cfg);

struct Prediction {
    int label;  // -1 or +1
    Eigen::RowVector2d probabilities;
};

Prediction predict(const MaGNetModel& model, const AdjacencyMatrix& adjacency, const Matrix& x);

double evaluate_accuracy(const MaGNetModel& model, const GraphDataset& dataset);

// unweighted softmax-regression head on precomputed fused embeddings
HeadModel train_head(const Matrix& fused, const std::vector<int>& labels, const ActorConfig& cfg);

/// Two-layer GCN baseline with the augmented Laplacian, trained end to end.
struct GcnModel {
    Matrix w0, w1;      // conv weights
    Matrix head_w;      // hidden -> 2
    Matrix head_b;      // 1 x 2
    Matrix laplacian;   // dense augmented Laplacian used at train time
};

GcnModel train_gcn_baseline(const GraphDataset& train, int hidden_dim, int epochs, double lr,
                            std::uint64_t seed);

Prediction gcn_predict(const GcnModel& model, const Matrix& x);
double gcn_accuracy(const GcnModel& model, const GraphDataset& dataset);

// mean CE loss of the GCN on a dataset; exposed for gradient checks
double gcn_loss(const GcnModel& model, const GraphDataset& dataset);

// loss expression over params {w0, w1, head_w, head_b}; shared by training,
// gcn_loss, and finite-difference checks
ad::Var gcn_loss_expr(ad::Tape& tape, const std::vector<ad::Var>& params,
                      const Matrix& laplacian, const GraphDataset& data);

Matrix augmented_laplacian_dense(const AdjacencyMatrix& a);

}  // namespace magnet
