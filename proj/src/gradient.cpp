#include "sga/gradient.hpp"

#include <cmath>

#include "sga/error.hpp"

namespace sga {

double targeted_loss(const Eigen::VectorXd& probs, int c_t, int c_prime) {
  if (c_t == c_prime) throw Error("targeted_loss: c_prime must differ from c_t");
  if (c_t < 0 || c_prime < 0 || c_t >= probs.size() || c_prime >= probs.size()) {
    throw Error("targeted_loss: class id out of range");
  }
  if (!(probs[c_t] > 0.0) || !(probs[c_prime] > 0.0)) {
    throw Error("targeted_loss: zero probability entry (logits need calibration)");
  }
  return std::log(probs[c_prime]) - std::log(probs[c_t]);
}

GradientKernel::GradientKernel(const Subgraph& sub, const AttackContext& ctx, int c_t, int c_prime)
    : sub_(sub), ctx_(ctx), k_(ctx.k()) {
  if (sub.radius() != k_) throw Error("subgraph radius does not match surrogate k");
  const int classes = ctx.num_classes();
  if (c_t == c_prime || c_t < 0 || c_prime < 0 || c_t >= classes || c_prime >= classes) {
    throw Error("GradientKernel: invalid class pair");
  }
  const auto n = static_cast<Eigen::Index>(sub.num_nodes());
  const auto nodes = sub.nodes();
  const auto& projected = ctx.projected();
  norms_ = sub.local_norms();

  forward_.reserve(static_cast<std::size_t>(k_));
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  r[sub.local_index(sub.target())] = 1.0;
  for (int j = 0; j < k_; ++j) {
    forward_.push_back(r);
    r = norms_.cwiseProduct(sub.adjacency_scaled(r, norms_));
  }

  Eigen::VectorXd logits = Eigen::VectorXd::Zero(classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r[i] != 0.0) logits += r[i] * projected.row(nodes[static_cast<std::size_t>(i)]).transpose();
  }
  probs_ = softmax(logits / ctx.epsilon());

  // Chain through the softmax explicitly so that an underflowed probability
  // surfaces as a non-finite gradient instead of being silently cancelled.
  Eigen::VectorXd d_probs = Eigen::VectorXd::Zero(classes);
  d_probs[c_prime] = 1.0 / probs_[c_prime];
  d_probs[c_t] = -1.0 / probs_[c_t];
  const double inner = probs_.dot(d_probs);
  grad_logits_ = probs_.cwiseProduct((d_probs.array() - inner).matrix()) / ctx.epsilon();
  if (!grad_logits_.allFinite()) {
    throw Error("non-finite gradient for target " + std::to_string(sub.target()) +
                " (probabilities underflowed; increase epsilon)");
  }
  loss_ = targeted_loss(probs_, c_t, c_prime);

  backward_.assign(static_cast<std::size_t>(k_) + 1, Eigen::VectorXd());
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = seed_value(nodes[static_cast<std::size_t>(i)]);
  backward_[static_cast<std::size_t>(k_)] = s;
  for (int m = k_ - 1; m >= 1; --m) {
    backward_[static_cast<std::size_t>(m)] =
        norms_.cwiseProduct(sub.adjacency_scaled(backward_[static_cast<std::size_t>(m) + 1], norms_));
  }

  degree_term_ = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < k_; ++j) {
    const auto& rj = forward_[static_cast<std::size_t>(j)];
    const auto& gj = backward_[static_cast<std::size_t>(j) + 1];
    degree_term_ += rj.cwiseProduct(sub.adjacency_scaled(gj, norms_)) +
                    gj.cwiseProduct(sub.adjacency_scaled(rj, norms_));
  }
}

double GradientKernel::seed_value(NodeId u) const {
  return ctx_.projected().row(u).dot(grad_logits_);
}

double GradientKernel::forward_value(NodeId u, int step) const {
  const int i = sub_.local_index(u);
  return i < 0 ? 0.0 : forward_[static_cast<std::size_t>(step)][i];
}

double GradientKernel::backward_value(NodeId u, int level) {
  const int i = sub_.local_index(u);
  if (i >= 0) {
    const int d = sub_.local_distance(i);
    if (d >= 0 && d <= level) return backward_[static_cast<std::size_t>(level)][i];
  }
  return remote_backward(u)[static_cast<std::size_t>(level)];
}

// (Â^{k-m} s)[u] for m = 1..k, walking outward from u on the current graph.
const std::vector<double>& GradientKernel::remote_backward(NodeId u) {
  if (const auto it = remote_.find(u); it != remote_.end()) return it->second;
  const auto& graph = sub_.current();
  auto norm = [&](NodeId v) { return 1.0 / std::sqrt(graph.degree(v) + 1.0); };

  std::vector<double> values(static_cast<std::size_t>(k_) + 1, 0.0);
  std::unordered_map<NodeId, double> walk{{u, 1.0}};
  for (int hops = 0;; ++hops) {
    double acc = 0.0;
    for (const auto& [v, w] : walk) acc += w * seed_value(v);
    values[static_cast<std::size_t>(k_ - hops)] = acc;
    if (hops == k_ - 1) break;
    std::unordered_map<NodeId, double> next;
    for (const auto& [v, w] : walk) {
      const double nv = norm(v);
      next[v] += w * nv * nv;
      graph.for_each_neighbor(v, [&](NodeId x) { next[x] += w * nv * norm(x); });
    }
    walk = std::move(next);
  }
  return remote_.emplace(u, std::move(values)).first->second;
}

double GradientKernel::pair_gradient(NodePair p) {
  const NodeId a = p.u;
  const NodeId b = p.v;
  if (a == b) throw Error("pair_gradient: self pair");
  double cross = 0.0;
  for (int j = 0; j < k_; ++j) {
    if (const double ra = forward_value(a, j); ra != 0.0) cross += ra * backward_value(b, j + 1);
    if (const double rb = forward_value(b, j); rb != 0.0) cross += rb * backward_value(a, j + 1);
  }
  const auto& graph = sub_.current();
  const double na = 1.0 / std::sqrt(graph.degree(a) + 1.0);
  const double nb = 1.0 / std::sqrt(graph.degree(b) + 1.0);
  const int ia = sub_.local_index(a);
  const int ib = sub_.local_index(b);
  const double ha = ia < 0 ? 0.0 : degree_term_[ia];
  const double hb = ib < 0 ? 0.0 : degree_term_[ib];
  const double grad = cross * na * nb - 0.5 * na * na * na * ha - 0.5 * nb * nb * nb * hb;
  if (!std::isfinite(grad)) {
    throw Error("non-finite gradient for pair (" + std::to_string(a) + "," + std::to_string(b) + ")");
  }
  return grad;
}

}  // namespace sga
