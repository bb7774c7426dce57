#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sga/graph.hpp"

namespace sga {

// Linear SGC with collapsed weights: softmax(Â^k X W / epsilon).
struct SurrogateModel {
  Eigen::MatrixXd weight;  // F x C
  int k = 2;
  double epsilon = 1.0;  // 1 means uncalibrated

  int num_classes() const { return static_cast<int>(weight.cols()); }
};

// Two-layer GCN: softmax(Â ReLU(Â X W0) W1).
struct GcnModel {
  Eigen::MatrixXd w0;  // F x H
  Eigen::MatrixXd w1;  // H x C

  int hidden() const { return static_cast<int>(w0.cols()); }
  int num_classes() const { return static_cast<int>(w1.cols()); }
};

enum class Optimizer { kGradientDescent, kAdam };

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  double weight_decay = 5e-5;
  std::uint64_t seed = 42;
  int early_stop_patience = 50;  // <= 0 disables early stopping
  Optimizer optimizer = Optimizer::kAdam;

  void validate() const;
};

TrainConfig default_sgc_config();
TrainConfig default_gcn_config();

// Per-epoch record, filled when the caller asks for it.
struct TrainingLog {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
};

// Â^k M with Â = D̃^{-1/2}(A+I)D̃^{-1/2}, applied as k sparse products.
Eigen::MatrixXd normalized_propagate(const Graph& g, int k, const Eigen::MatrixXd& m);

// Normalized adjacency with self-loops as a sparse matrix.
SparseRowMatrix normalized_adjacency(const Graph& g);

// Rows of Â^k X for the given nodes (one output row per entry of `rows`).
SparseRowMatrix propagated_feature_rows(const Graph& g, int k, std::span<const NodeId> rows);

void softmax_rows(Eigen::MatrixXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

SurrogateModel train_sgc(const Graph& g, const Split& split, int k, const TrainConfig& cfg,
                         TrainingLog* log = nullptr);

// n x C probabilities using the model's epsilon.
Eigen::MatrixXd predict_full(const Graph& g, const SurrogateModel& m);

// Probabilities for selected rows only.
Eigen::MatrixXd predict_rows(const Graph& g, const SurrogateModel& m, std::span<const NodeId> rows);

GcnModel train_gcn(const Graph& g, const Split& split, int hidden, const TrainConfig& cfg,
                   TrainingLog* log = nullptr);

Eigen::MatrixXd gcn_predict_full(const Graph& g, const GcnModel& m);

// Mean cross-entropy over `nodes` and its gradients (no weight decay).
struct GcnGradients {
  double loss = 0.0;
  Eigen::MatrixXd d_w0;
  Eigen::MatrixXd d_w1;
};
GcnGradients gcn_loss_gradients(const Graph& g, const GcnModel& m, std::span<const NodeId> nodes);

struct SgcGradients {
  double loss = 0.0;
  Eigen::MatrixXd d_weight;
};
SgcGradients sgc_loss_gradients(const Graph& g, const SurrogateModel& m, std::span<const NodeId> nodes);

// Z[c_t] - max_{c != c_t} Z[c]; negative means misclassified.
double classification_margin(std::span<const double> probs, int true_class);
double classification_margin(const Eigen::VectorXd& probs, int true_class);

// argmax over c != excluded.
int best_other_class(const Eigen::VectorXd& row, int excluded);

}  // namespace sga
