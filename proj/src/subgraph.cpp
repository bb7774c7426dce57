#include "sga/subgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "sga/error.hpp"
#include "sga/gradient.hpp"

namespace sga {

bool Subgraph::is_attacker(NodeId u) const {
  return std::find(attackers_.begin(), attackers_.end(), u) != attackers_.end();
}

std::vector<NodePair> Subgraph::edges() const {
  std::vector<NodePair> out(edges_.begin(), edges_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Subgraph::stored_edges() const {
  std::size_t pending = 0;
  for (const auto& p : candidates_) {
    if (!current_.has_edge(p.u, p.v)) ++pending;
  }
  return edges_.size() + pending;
}

void Subgraph::note_size() { peak_stored_edges_ = std::max(peak_stored_edges_, stored_edges()); }

int Subgraph::add_node(NodeId u) {
  const auto [it, inserted] = local_.try_emplace(u, static_cast<int>(nodes_.size()));
  if (inserted) {
    nodes_.push_back(u);
    distance_.push_back(-1);
    adjacency_.emplace_back();
  }
  return it->second;
}

void Subgraph::add_edge(NodeId u, NodeId v) {
  if (!edges_.insert(NodePair(u, v)).second) return;
  const int a = add_node(u);
  const int b = add_node(v);
  adjacency_[a].push_back(b);
  adjacency_[b].push_back(a);
}

void Subgraph::remove_edge(NodeId u, NodeId v) {
  if (edges_.erase(NodePair(u, v)) == 0) return;
  const int a = local_index(u);
  const int b = local_index(v);
  std::erase(adjacency_[a], b);
  std::erase(adjacency_[b], a);
}

void Subgraph::refresh_distances() {
  std::fill(distance_.begin(), distance_.end(), -1);
  distance_[add_node(target_)] = 0;
  std::vector<NodeId> frontier{target_};
  for (int depth = 1; depth <= radius_ && !frontier.empty(); ++depth) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      current_.for_each_neighbor(u, [&](NodeId v) {
        const int i = add_node(v);
        if (distance_[i] < 0) {
          distance_[i] = depth;
          next.push_back(v);
        }
      });
    }
    frontier = std::move(next);
  }
}

void Subgraph::absorb_needed_edges() {
  const std::size_t count = nodes_.size();
  for (std::size_t i = 0; i < count; ++i) {
    if (distance_[i] < 0 || distance_[i] > radius_ - 1) continue;
    const NodeId u = nodes_[i];
    current_.for_each_neighbor(u, [&](NodeId v) { add_edge(u, v); });
  }
}

Eigen::VectorXd Subgraph::local_norms() const {
  Eigen::VectorXd norms(static_cast<Eigen::Index>(nodes_.size()));
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    norms[static_cast<Eigen::Index>(i)] = 1.0 / std::sqrt(current_.degree(nodes_[i]) + 1.0);
  }
  return norms;
}

Eigen::VectorXd Subgraph::adjacency_scaled(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& norms) const {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double acc = x[i] * norms[i];
    for (int j : adjacency_[static_cast<std::size_t>(i)]) acc += x[j] * norms[j];
    out[i] = acc;
  }
  return out;
}

std::string Subgraph::debug_json() const {
  nlohmann::ordered_json j;
  j["target"] = target_;
  j["radius"] = radius_;
  j["mode"] = mode_ == AttackMode::kDirect ? "direct" : "influence";
  j["attackers"] = attackers_;
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  std::vector<std::size_t> order(nodes_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes_[a] < nodes_[b]; });
  for (auto i : order) nodes.push_back({nodes_[i], distance_[i]});
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : this->edges()) edges.push_back({e.u, e.v});
  auto& cands = j["candidates"] = nlohmann::ordered_json::array();
  for (const auto& e : candidates_) {
    cands.push_back({e.u, e.v, current_.has_edge(e.u, e.v) ? "remove" : "add"});
  }
  j["potential_empty"] = potential_empty_;
  j["peak_stored_edges"] = peak_stored_edges_;
  return j.dump();
}

Subgraph extract_khop(std::shared_ptr<const Graph> g, NodeId t, int k, AttackMode mode) {
  if (!g) throw Error("extract_khop: null graph");
  if (t < 0 || t >= g->num_nodes()) throw Error("extract_khop: target out of range");
  if (k < 1) throw ConfigError("radius k must be >= 1");
  if (mode == AttackMode::kInfluence && g->degree(t) == 0) {
    throw Error("influence attack on isolated target " + std::to_string(t));
  }

  Subgraph sub(std::move(g));
  sub.target_ = t;
  sub.radius_ = k;
  sub.mode_ = mode;
  sub.refresh_distances();
  sub.absorb_needed_edges();

  if (mode == AttackMode::kDirect) {
    sub.attackers_ = {t};
  } else {
    sub.attackers_ = sub.current_.neighbors(t);
  }
  for (NodeId a : sub.attackers_) {
    const int i = sub.local_index(a);
    for (int j : sub.adjacency_[i]) {
      const NodeId v = sub.nodes_[j];
      if (mode == AttackMode::kInfluence && v == t) continue;
      sub.candidates_.insert(NodePair(a, v));
    }
  }
  sub.note_size();
  return sub;
}

namespace {

double cosine(const Graph& g, NodeId a, NodeId b) {
  const auto& x = g.features();
  const double na = x.row(a).norm();
  const double nb = x.row(b).norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return x.row(a).dot(x.row(b)) / (na * nb);
}

}  // namespace

void add_potential_edges(Subgraph& sub, const AttackContext& ctx, int budget,
                         const SubgraphOptions& options) {
  if (budget < 0) throw ConfigError("budget must be >= 0");
  if (budget == 0) return;
  if (sub.radius_ != ctx.k()) throw Error("subgraph radius does not match surrogate k");

  const Graph& g = ctx.graph();
  const NodeId t = sub.target_;
  const int c_t = g.label(t);
  const int c_prime = ctx.runner_up(t);

  std::vector<NodeId> potential;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (g.label(u) == c_prime && !sub.contains(u)) potential.push_back(u);
  }
  if (potential.empty()) {
    sub.potential_empty_ = true;
    return;
  }

  if (options.potential_prefilter && potential.size() > options.prefilter_threshold) {
    const std::size_t keep = std::min(potential.size(), static_cast<std::size_t>(budget) * 10);
    std::vector<std::pair<double, NodeId>> ranked;
    ranked.reserve(potential.size());
    for (NodeId u : potential) ranked.emplace_back(-cosine(g, t, u), u);
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end());
    potential.clear();
    for (std::size_t i = 0; i < keep; ++i) potential.push_back(ranked[i].second);
    std::sort(potential.begin(), potential.end());
  }

  GradientKernel kernel(sub, ctx, c_t, c_prime);
  std::vector<std::pair<double, NodePair>> scored;
  scored.reserve(potential.size() * sub.attackers_.size());
  for (NodeId a : sub.attackers_) {
    for (NodeId p : potential) {
      if (a == p) continue;
      const NodePair pair(a, p);
      scored.emplace_back(kernel.pair_gradient(pair), pair);
    }
  }
  const std::size_t keep = std::min(scored.size(), static_cast<std::size_t>(budget));
  auto better = [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    better);
  for (std::size_t i = 0; i < keep; ++i) {
    const NodePair pair = scored[i].second;
    sub.candidates_.insert(pair);
    sub.add_node(pair.u);
    sub.add_node(pair.v);
  }
  sub.note_size();
}

void apply_flip_and_expand(Subgraph& sub, NodePair e) {
  if (!sub.candidates_.contains(e)) {
    throw Error("pair (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not a candidate");
  }
  sub.candidates_.erase(e);
  const bool now_present = sub.current_.flip(e.u, e.v);
  if (!now_present) sub.remove_edge(e.u, e.v);
  sub.refresh_distances();
  sub.absorb_needed_edges();
  sub.note_size();
}

Eigen::VectorXd predict_target(const Subgraph& sub, const AttackContext& ctx) {
  if (sub.radius() != ctx.k()) throw Error("subgraph radius does not match surrogate k");
  const Eigen::VectorXd norms = sub.local_norms();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sub.num_nodes()));
  r[sub.local_index(sub.target())] = 1.0;
  for (int step = 0; step < sub.radius(); ++step) r = norms.cwiseProduct(sub.adjacency_scaled(r, norms));

  const auto& projected = ctx.projected();
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(projected.cols());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r[i] != 0.0) logits += r[i] * projected.row(sub.nodes()[static_cast<std::size_t>(i)]).transpose();
  }
  return softmax(logits / ctx.epsilon());
}

}  // namespace sga
