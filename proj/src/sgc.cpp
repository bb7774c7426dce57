#include <cmath>
#include <vector>

#include "optimizer.hpp"
#include "sga/error.hpp"
#include "sga/models.hpp"

namespace sga {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
}

TrainConfig default_sgc_config() {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  return cfg;
}

TrainConfig default_gcn_config() {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  return cfg;
}

namespace {

std::vector<int> labels_of(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<int> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = g.label(nodes[i]);
  return out;
}

double evaluate_loss(const SparseRowMatrix& rows, const Eigen::MatrixXd& w, std::span<const int> labels,
                     Eigen::MatrixXd* grad) {
  Eigen::MatrixXd probs = rows * w;
  softmax_rows(probs);
  const double loss = detail::cross_entropy_backward(probs, labels);
  if (grad) *grad = rows.transpose() * probs;
  return loss;
}

}  // namespace

SgcGradients sgc_loss_gradients(const Graph& g, const SurrogateModel& m, std::span<const NodeId> nodes) {
  const auto rows = propagated_feature_rows(g, m.k, nodes);
  const auto labels = labels_of(g, nodes);
  SgcGradients out;
  out.loss = evaluate_loss(rows, m.weight, labels, &out.d_weight);
  return out;
}

SurrogateModel train_sgc(const Graph& g, const Split& split, int k, const TrainConfig& cfg, TrainingLog* log) {
  cfg.validate();
  if (k < 1) throw ConfigError("SGC depth k must be at least 1");
  if (split.train.empty()) throw Error("train_sgc: empty training set");

  // Only labelled rows enter the loss, so only their rows of Â^k X are built.
  const auto train_rows = propagated_feature_rows(g, k, split.train);
  const auto val_rows = propagated_feature_rows(g, k, split.validation);
  const auto train_labels = labels_of(g, split.train);
  const auto val_labels = labels_of(g, split.validation);

  SurrogateModel model;
  model.k = k;
  model.weight = detail::uniform_init(g.num_features(), g.num_classes(), cfg.seed);

  detail::ParameterStepper stepper(cfg, model.weight.rows(), model.weight.cols());
  detail::EarlyStopper stopper(cfg.early_stop_patience);
  Eigen::MatrixXd best = model.weight;
  Eigen::MatrixXd grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = evaluate_loss(train_rows, model.weight, train_labels, &grad);
    if (!std::isfinite(loss)) throw Error("train_sgc: non-finite loss (learning rate too large?)");
    stepper.step(model.weight, grad);

    const double val_loss = split.validation.empty()
                                ? loss
                                : evaluate_loss(val_rows, model.weight, val_labels, nullptr);
    if (log) {
      log->train_loss.push_back(loss);
      log->validation_loss.push_back(val_loss);
    }
    if (stopper.observe(val_loss)) best = model.weight;
    if (stopper.should_stop()) break;
  }
  if (!model.weight.allFinite()) throw Error("train_sgc: weights diverged");
  if (cfg.early_stop_patience > 0) model.weight = best;
  return model;
}

Eigen::MatrixXd predict_full(const Graph& g, const SurrogateModel& m) {
  // Â^k X W = Â^k (X W): project first, then propagate C columns.
  Eigen::MatrixXd projected = g.sparse_features() * m.weight;
  Eigen::MatrixXd logits = normalized_propagate(g, m.k, projected) / m.epsilon;
  softmax_rows(logits);
  return logits;
}

Eigen::MatrixXd predict_rows(const Graph& g, const SurrogateModel& m, std::span<const NodeId> rows) {
  Eigen::MatrixXd logits = propagated_feature_rows(g, m.k, rows) * m.weight / m.epsilon;
  softmax_rows(logits);
  return logits;
}

}  // namespace sga
