#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "sga/attacks.hpp"
#include "sga/error.hpp"

namespace sga {

Eigen::MatrixXd dense_gradient(const Graph& g, const Eigen::MatrixXd& projected, NodeId t, int k,
                               double epsilon, int c_t, int c_prime, NodeId dense_limit) {
  const NodeId n = g.num_nodes();
  if (n > dense_limit) {
    throw Error("graph too large for dense gradient: n=" + std::to_string(n) + " exceeds limit " +
                std::to_string(dense_limit));
  }
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(epsilon >= 1.0)) throw ConfigError("epsilon must be >= 1");
  if (c_t == c_prime) throw Error("dense_gradient: c_prime must differ from c_t");

  Eigen::VectorXd norms(n);
  for (NodeId u = 0; u < n; ++u) norms[u] = 1.0 / std::sqrt(g.degree(u) + 1.0);
  Eigen::MatrixXd tilde = Eigen::MatrixXd::Identity(n, n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : g.neighbors(u)) tilde(u, v) = 1.0;
  }
  const Eigen::MatrixXd a_hat = norms.asDiagonal() * tilde * norms.asDiagonal();

  std::vector<Eigen::VectorXd> forward;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  r[t] = 1.0;
  for (int j = 0; j < k; ++j) {
    forward.push_back(r);
    r = a_hat * r;
  }
  const Eigen::VectorXd probs = softmax(projected.transpose() * r / epsilon);

  Eigen::VectorXd d_probs = Eigen::VectorXd::Zero(probs.size());
  d_probs[c_prime] = 1.0 / probs[c_prime];
  d_probs[c_t] = -1.0 / probs[c_t];
  const Eigen::VectorXd d_logits =
      probs.cwiseProduct((d_probs.array() - probs.dot(d_probs)).matrix()) / epsilon;
  if (!d_logits.allFinite()) throw Error("non-finite gradient (probabilities underflowed)");

  std::vector<Eigen::VectorXd> backward(static_cast<std::size_t>(k) + 1);
  backward[static_cast<std::size_t>(k)] = projected * d_logits;
  for (int m = k - 1; m >= 1; --m) {
    backward[static_cast<std::size_t>(m)] = a_hat * backward[static_cast<std::size_t>(m) + 1];
  }

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < k; ++j) {
    const auto& rj = forward[static_cast<std::size_t>(j)];
    const auto& gj = backward[static_cast<std::size_t>(j) + 1];
    grad.noalias() += rj * gj.transpose();
    h += rj.cwiseProduct(tilde * norms.cwiseProduct(gj)) + gj.cwiseProduct(tilde * norms.cwiseProduct(rj));
  }
  const Eigen::VectorXd h_scaled = 0.5 * norms.array().cube().matrix().cwiseProduct(h);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u; v < n; ++v) {
      const double value = (grad(u, v) + grad(v, u)) * norms[u] * norms[v] - h_scaled[u] - h_scaled[v];
      grad(u, v) = value;
      grad(v, u) = value;
    }
  }
  return grad;
}

Perturbation gradargmax_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg) {
  return gradargmax_attack(ctx, t, cfg, cfg.budget_for(ctx.graph(), t));
}

Perturbation gradargmax_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg,
                               int budget) {
  cfg.validate();
  if (cfg.k != ctx.k()) throw ConfigError("attack k does not match surrogate k");
  if (budget < 0) throw ConfigError("budget must be >= 0");
  const Graph& g = ctx.graph();
  if (t < 0 || t >= g.num_nodes()) throw Error("target out of range");
  const auto start = std::chrono::steady_clock::now();

  Perturbation out;
  out.target = t;
  out.budget = budget;
  out.strategy = Strategy::kGradArgmax;
  if (budget == 0) return out;

  std::vector<NodeId> attackers;
  if (cfg.mode == AttackMode::kInfluence) {
    if (g.degree(t) == 0) throw Error("influence attack on isolated target " + std::to_string(t));
    const auto nb = g.neighbors(t);
    attackers.assign(nb.begin(), nb.end());
  } else {
    attackers = {t};
  }

  const double epsilon = cfg.gradargmax_epsilon.value_or(cfg.epsilon);
  const Eigen::MatrixXd grad = dense_gradient(g, ctx.projected(), t, cfg.k, epsilon, g.label(t),
                                              ctx.runner_up(t), cfg.dense_limit);

  std::set<NodePair> seen;
  std::vector<std::pair<double, NodePair>> scored;
  for (NodeId a : attackers) {
    for (NodeId x = 0; x < g.num_nodes(); ++x) {
      if (x == a) continue;
      if (cfg.mode == AttackMode::kInfluence && x == t) continue;
      const NodePair pair(a, x);
      if (!seen.insert(pair).second) continue;
      const double s = g.has_edge(a, x) ? -grad(a, x) : grad(a, x);
      scored.emplace_back(s, pair);
    }
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });

  std::vector<int> degree(g.degrees().begin(), g.degrees().end());
  for (const auto& [score, pair] : scored) {
    if (static_cast<int>(out.flips.size()) == budget) break;
    if (cfg.stop_on_nonpositive && score <= 0.0) break;
    const bool present = g.has_edge(pair.u, pair.v);
    if (present && cfg.forbid_singletons && (degree[pair.u] <= 1 || degree[pair.v] <= 1)) continue;
    const int delta = present ? -1 : 1;
    degree[pair.u] += delta;
    degree[pair.v] += delta;
    out.flips.push_back({pair.u, pair.v, present ? FlipAction::kRemove : FlipAction::kAdd});
  }
  out.partial = static_cast<int>(out.flips.size()) < budget;
  out.peak_subgraph_edges = static_cast<std::size_t>(g.num_nodes()) * static_cast<std::size_t>(g.num_nodes());
  if (cfg.timing) {
    out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

}  // namespace sga
