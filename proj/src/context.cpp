#include "sga/context.hpp"

#include "sga/error.hpp"

namespace sga {

AttackContext::AttackContext(std::shared_ptr<const Graph> graph, SurrogateModel model, double epsilon)
    : graph_(std::move(graph)), model_(std::move(model)) {
  if (!graph_) throw Error("AttackContext: null graph");
  if (!(epsilon >= 1.0)) throw ConfigError("epsilon must be >= 1");
  if (model_.weight.rows() != graph_->num_features()) {
    throw Error("AttackContext: surrogate expects " + std::to_string(model_.weight.rows()) +
                " features, graph has " + std::to_string(graph_->num_features()));
  }
  if (model_.num_classes() != graph_->num_classes()) {
    throw Error("AttackContext: surrogate class count does not match graph");
  }
  model_.epsilon = epsilon;
  projected_ = graph_->sparse_features() * model_.weight;
  clean_probs_ = predict_full(*graph_, model_);
}

int AttackContext::runner_up(NodeId t) const {
  return best_other_class(clean_probs_.row(t).transpose(), graph_->label(t));
}

}  // namespace sga
