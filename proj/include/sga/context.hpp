#pragma once

#include <memory>

#include <Eigen/Dense>

#include "sga/graph.hpp"
#include "sga/models.hpp"

namespace sga {

// Per-(graph, surrogate) data shared by all attacks on that pair: the
// projected features X W and the calibrated clean predictions.
class AttackContext {
 public:
  AttackContext(std::shared_ptr<const Graph> graph, SurrogateModel model, double epsilon);

  const Graph& graph() const { return *graph_; }
  const std::shared_ptr<const Graph>& graph_ptr() const { return graph_; }
  const SurrogateModel& model() const { return model_; }
  int k() const { return model_.k; }
  double epsilon() const { return model_.epsilon; }
  int num_classes() const { return model_.num_classes(); }

  // X W, uncalibrated, n x C.
  const Eigen::MatrixXd& projected() const { return projected_; }
  // softmax(Â^k X W / epsilon) on the clean graph, n x C.
  const Eigen::MatrixXd& clean_probs() const { return clean_probs_; }

  // Most probable class other than the true label, from the clean prediction.
  int runner_up(NodeId t) const;

 private:
  std::shared_ptr<const Graph> graph_;
  SurrogateModel model_;
  Eigen::MatrixXd projected_;
  Eigen::MatrixXd clean_probs_;
};

}  // namespace sga
