#pragma once

#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "sga/context.hpp"
#include "sga/graph.hpp"
#include "sga/perturbed_graph.hpp"

namespace sga {

enum class AttackMode { kDirect, kInfluence };

struct SubgraphOptions {
  // Reject deletions that would leave an endpoint with degree 0.
  bool forbid_singletons = false;
  // Pre-rank potential nodes by feature similarity to the target when there
  // are more than `prefilter_threshold` of them, keeping 10 * budget.
  bool potential_prefilter = false;
  std::size_t prefilter_threshold = 50000;
};

// Local view of the k-hop neighbourhood of one target, plus the running
// perturbed full graph.
//
// Maintained invariants:
//   * every node within `radius` hops of the target (current graph) is a member;
//   * every current edge incident to a node within radius-1 hops is in the
//     edge set (these are exactly the edges a length-k walk from t can use);
//   * the edge set is a subset of the current graph.
// Together they make the target's row of Â^k, computed locally with global
// degrees, equal to the full-graph row.
class Subgraph {
 public:
  NodeId target() const { return target_; }
  int radius() const { return radius_; }
  AttackMode mode() const { return mode_; }

  std::span<const NodeId> nodes() const { return nodes_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  bool contains(NodeId u) const { return local_.contains(u); }
  int local_index(NodeId u) const {
    const auto it = local_.find(u);
    return it == local_.end() ? -1 : it->second;
  }

  // Current hop distance from the target, or -1 when beyond the radius.
  int distance(NodeId u) const {
    const int i = local_index(u);
    return i < 0 ? -1 : distance_[i];
  }
  int local_distance(int i) const { return distance_[i]; }
  std::span<const int> local_neighbors(int i) const { return adjacency_[i]; }

  std::span<const NodeId> attackers() const { return attackers_; }
  bool is_attacker(NodeId u) const;

  std::vector<NodePair> edges() const;
  std::size_t num_edges() const { return edges_.size(); }
  bool has_local_edge(NodeId u, NodeId v) const { return edges_.contains(NodePair(u, v)); }

  const std::set<NodePair>& candidates() const { return candidates_; }
  bool is_candidate(NodePair p) const { return candidates_.contains(p); }

  // Degree of u in the current perturbed full graph.
  int global_degree(NodeId u) const { return current_.degree(u); }
  const PerturbedGraph& current() const { return current_; }

  // Set when no node of the runner-up class was available.
  bool potential_empty() const { return potential_empty_; }

  // Stored local edges plus pending addition candidates.
  std::size_t stored_edges() const;
  std::size_t peak_stored_edges() const { return peak_stored_edges_; }

  // 1 / sqrt(current degree + 1) for every local node.
  Eigen::VectorXd local_norms() const;
  // (A + I) diag(norms) x over the local edge set. Multiplying the result by
  // `norms` gives Â x.
  Eigen::VectorXd adjacency_scaled(const Eigen::VectorXd& x, const Eigen::VectorXd& norms) const;

  std::string debug_json() const;

 private:
  friend Subgraph extract_khop(std::shared_ptr<const Graph> g, NodeId t, int k, AttackMode mode);
  friend void add_potential_edges(Subgraph& sub, const AttackContext& ctx, int budget,
                                  const SubgraphOptions& options);
  friend void apply_flip_and_expand(Subgraph& sub, NodePair e);

  explicit Subgraph(std::shared_ptr<const Graph> g) : current_(std::move(g)) {}

  int add_node(NodeId u);
  void add_edge(NodeId u, NodeId v);
  void remove_edge(NodeId u, NodeId v);
  void refresh_distances();
  void absorb_needed_edges();
  void note_size();

  NodeId target_ = 0;
  int radius_ = 0;
  AttackMode mode_ = AttackMode::kDirect;
  PerturbedGraph current_;
  std::vector<NodeId> nodes_;
  std::unordered_map<NodeId, int> local_;
  std::vector<int> distance_;
  std::vector<std::vector<int>> adjacency_;
  std::unordered_set<NodePair> edges_;
  std::vector<NodeId> attackers_;
  std::set<NodePair> candidates_;
  bool potential_empty_ = false;
  std::size_t peak_stored_edges_ = 0;
};

// Nodes within k hops of t with their needed edges. Attackers are {t} for
// direct attacks and N(t) for influence attacks; deletion candidates are the
// subgraph edges incident to an attacker (never to t in influence mode).
Subgraph extract_khop(std::shared_ptr<const Graph> g, NodeId t, int k, AttackMode mode);

// Scores attacker x potential-node pairs (potential nodes: label equal to the
// target's runner-up class, outside the subgraph) by the targeted-loss
// gradient and keeps the `budget` best as addition candidates.
void add_potential_edges(Subgraph& sub, const AttackContext& ctx, int budget,
                         const SubgraphOptions& options = {});

// Toggles candidate e in the running graph and the subgraph, drops it from the
// candidate set and absorbs nodes and edges that came within reach.
void apply_flip_and_expand(Subgraph& sub, NodePair e);

// Calibrated prediction row of the target computed from the subgraph only.
Eigen::VectorXd predict_target(const Subgraph& sub, const AttackContext& ctx);

}  // namespace sga
