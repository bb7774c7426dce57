#pragma once

#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sga/graph.hpp"

namespace sga {

// A clean graph plus a set of toggled pairs. Lets an attack edit the running
// full graph without copying the CSR arrays on every flip.
class PerturbedGraph {
 public:
  explicit PerturbedGraph(std::shared_ptr<const Graph> base);

  const Graph& base() const { return *base_; }
  const std::shared_ptr<const Graph>& base_ptr() const { return base_; }
  NodeId num_nodes() const { return base_->num_nodes(); }

  bool has_edge(NodeId u, NodeId v) const;
  int degree(NodeId u) const;

  template <typename Visit>
  void for_each_neighbor(NodeId u, Visit&& visit) const {
    const auto removed = removed_.find(u);
    for (NodeId v : base_->neighbors(u)) {
      if (removed != removed_.end() && contains(removed->second, v)) continue;
      visit(v);
    }
    if (const auto added = added_.find(u); added != added_.end()) {
      for (NodeId v : added->second) visit(v);
    }
  }

  std::vector<NodeId> neighbors(NodeId u) const;

  // Toggles (u, v); returns true when the edge now exists.
  bool flip(NodeId u, NodeId v);

  bool is_toggled(NodeId u, NodeId v) const { return toggled_.contains(NodePair(u, v)); }
  std::size_t num_toggled() const { return toggled_.size(); }

  Graph materialize() const;

 private:
  static bool contains(const std::vector<NodeId>& values, NodeId v);
  static void erase(std::vector<NodeId>& values, NodeId v);

  std::shared_ptr<const Graph> base_;
  std::unordered_map<NodeId, std::vector<NodeId>> added_;
  std::unordered_map<NodeId, std::vector<NodeId>> removed_;
  std::unordered_set<NodePair> toggled_;
};

}  // namespace sga
