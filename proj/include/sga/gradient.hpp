#pragma once

#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "sga/context.hpp"
#include "sga/subgraph.hpp"

namespace sga {

// ln probs[c_prime] - ln probs[c_t]. Throws on a zero probability.
double targeted_loss(const Eigen::VectorXd& probs, int c_t, int c_prime);

// Reverse-mode gradient of the calibrated targeted loss with respect to the
// symmetric adjacency entry of any node pair, evaluated on the current
// perturbed graph. One forward and one backward sweep over the subgraph are
// done up front; each pair query is then O(k), plus a k-1 hop walk for
// endpoints whose backward values are not available locally.
//
// Differentiates through D̃(A), so the degree terms -1/2 D̃^{-3/2} are included.
class GradientKernel {
 public:
  GradientKernel(const Subgraph& sub, const AttackContext& ctx, int c_t, int c_prime);

  const Eigen::VectorXd& probabilities() const { return probs_; }
  double loss() const { return loss_; }

  // dL / dA_uv with A_uv = A_vu tied (sum of both directed partials).
  double pair_gradient(NodePair p);

 private:
  double forward_value(NodeId u, int step) const;
  double backward_value(NodeId u, int level);
  const std::vector<double>& remote_backward(NodeId u);
  double seed_value(NodeId u) const;

  const Subgraph& sub_;
  const AttackContext& ctx_;
  int k_;
  Eigen::VectorXd probs_;
  double loss_ = 0.0;
  Eigen::VectorXd grad_logits_;            // dL/dz, already divided by epsilon
  Eigen::VectorXd norms_;                  // local 1/sqrt(d̃)
  std::vector<Eigen::VectorXd> forward_;   // forward_[j] = Â^j e_t, j = 0..k-1
  std::vector<Eigen::VectorXd> backward_;  // backward_[m] = Â^{k-m} s, m = 1..k
  Eigen::VectorXd degree_term_;            // local H
  std::unordered_map<NodeId, std::vector<double>> remote_;
};

}  // namespace sga
