#include <cmath>

#include "optimizer.hpp"
#include "sga/error.hpp"
#include "sga/models.hpp"

namespace sga {

namespace {

// Forward and backward pass of the two-layer GCN for a fixed graph.
class GcnPass {
 public:
  explicit GcnPass(const Graph& g) : g_(g), adj_(normalized_adjacency(g)) {
    const auto& sparse = g.sparse_features();
    dense_features_ = static_cast<double>(sparse.nonZeros()) >
                      0.25 * static_cast<double>(sparse.rows()) * static_cast<double>(sparse.cols());
  }

  Eigen::MatrixXd probabilities(const GcnModel& m) const {
    const Eigen::MatrixXd hidden = (adj_ * features_times(m.w0)).cwiseMax(0.0);
    Eigen::MatrixXd out = adj_ * (hidden * m.w1);
    softmax_rows(out);
    return out;
  }

  // Hidden pre-activations Â X W0, shared by the loss evaluations of one epoch.
  Eigen::MatrixXd pre_activation(const GcnModel& m) const { return adj_ * features_times(m.w0); }

  // Mean cross-entropy over the rows of `rows_of_adj`; fills gradients when
  // requested.
  double loss(const GcnModel& m, const Eigen::MatrixXd& pre, const SparseRowMatrix& rows_of_adj,
              std::span<const int> labels, GcnGradients* grads) const {
    const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
    const Eigen::MatrixXd projected = hidden * m.w1;
    Eigen::MatrixXd probs = rows_of_adj * projected;
    softmax_rows(probs);
    const double value = detail::cross_entropy_backward(probs, labels);
    if (grads) {
      grads->loss = value;
      const Eigen::MatrixXd d_projected = rows_of_adj.transpose() * probs;
      grads->d_w1 = hidden.transpose() * d_projected;
      Eigen::MatrixXd d_pre = d_projected * m.w1.transpose();
      d_pre = d_pre.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
      // Â is symmetric.
      const Eigen::MatrixXd d_xw = adj_ * d_pre;
      grads->d_w0 = dense_features_ ? Eigen::MatrixXd(g_.features().transpose() * d_xw)
                                    : Eigen::MatrixXd(g_.sparse_features().transpose() * d_xw);
    }
    return value;
  }

  SparseRowMatrix select_rows(std::span<const NodeId> nodes) const {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      for (SparseRowMatrix::InnerIterator it(adj_, nodes[r]); it; ++it) {
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
      }
    }
    SparseRowMatrix out(static_cast<Eigen::Index>(nodes.size()), adj_.cols());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
  }

 private:
  Eigen::MatrixXd features_times(const Eigen::MatrixXd& w) const {
    if (dense_features_) return g_.features() * w;
    return g_.sparse_features() * w;
  }

  const Graph& g_;
  SparseRowMatrix adj_;
  bool dense_features_ = false;
};

std::vector<int> labels_of(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<int> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = g.label(nodes[i]);
  return out;
}

}  // namespace

GcnGradients gcn_loss_gradients(const Graph& g, const GcnModel& m, std::span<const NodeId> nodes) {
  GcnPass pass(g);
  GcnGradients out;
  pass.loss(m, pass.pre_activation(m), pass.select_rows(nodes), labels_of(g, nodes), &out);
  return out;
}

GcnModel train_gcn(const Graph& g, const Split& split, int hidden, const TrainConfig& cfg, TrainingLog* log) {
  cfg.validate();
  if (hidden < 1) throw ConfigError("GCN hidden width must be at least 1");
  if (split.train.empty()) throw Error("train_gcn: empty training set");

  GcnPass pass(g);
  const auto train_rows = pass.select_rows(split.train);
  const auto val_rows = pass.select_rows(split.validation);
  const auto train_labels = labels_of(g, split.train);
  const auto val_labels = labels_of(g, split.validation);

  GcnModel model;
  model.w0 = detail::uniform_init(g.num_features(), hidden, cfg.seed);
  model.w1 = detail::uniform_init(hidden, g.num_classes(), derive_seed(cfg.seed, 1));

  detail::ParameterStepper step0(cfg, model.w0.rows(), model.w0.cols());
  detail::ParameterStepper step1(cfg, model.w1.rows(), model.w1.cols());
  detail::EarlyStopper stopper(cfg.early_stop_patience);
  GcnModel best = model;
  GcnGradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Validation loss is measured on the weights before this epoch's step,
    // so one forward pass serves both losses.
    const Eigen::MatrixXd pre = pass.pre_activation(model);
    const double loss = pass.loss(model, pre, train_rows, train_labels, &grads);
    if (!std::isfinite(loss)) throw Error("train_gcn: non-finite loss (learning rate too large?)");
    const double val_loss =
        split.validation.empty() ? loss : pass.loss(model, pre, val_rows, val_labels, nullptr);
    if (log) {
      log->train_loss.push_back(loss);
      log->validation_loss.push_back(val_loss);
    }
    if (stopper.observe(val_loss)) best = model;
    if (stopper.should_stop()) break;
    step0.step(model.w0, grads.d_w0);
    step1.step(model.w1, grads.d_w1);
  }
  if (!model.w0.allFinite() || !model.w1.allFinite()) throw Error("train_gcn: weights diverged");
  return cfg.early_stop_patience > 0 ? best : model;
}

Eigen::MatrixXd gcn_predict_full(const Graph& g, const GcnModel& m) {
  return GcnPass(g).probabilities(m);
}

}  // namespace sga
