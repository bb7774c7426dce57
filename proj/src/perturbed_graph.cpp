#include "sga/perturbed_graph.hpp"

#include <algorithm>

#include "sga/error.hpp"

namespace sga {

PerturbedGraph::PerturbedGraph(std::shared_ptr<const Graph> base) : base_(std::move(base)) {
  if (!base_) throw Error("PerturbedGraph: null base graph");
}

bool PerturbedGraph::contains(const std::vector<NodeId>& values, NodeId v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

void PerturbedGraph::erase(std::vector<NodeId>& values, NodeId v) {
  values.erase(std::remove(values.begin(), values.end(), v), values.end());
}

bool PerturbedGraph::has_edge(NodeId u, NodeId v) const {
  return base_->has_edge(u, v) != toggled_.contains(NodePair(u, v));
}

int PerturbedGraph::degree(NodeId u) const {
  int d = base_->degree(u);
  if (const auto it = added_.find(u); it != added_.end()) d += static_cast<int>(it->second.size());
  if (const auto it = removed_.find(u); it != removed_.end()) d -= static_cast<int>(it->second.size());
  return d;
}

std::vector<NodeId> PerturbedGraph::neighbors(NodeId u) const {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(degree(u)));
  for_each_neighbor(u, [&](NodeId v) { out.push_back(v); });
  std::sort(out.begin(), out.end());
  return out;
}

bool PerturbedGraph::flip(NodeId u, NodeId v) {
  if (u == v) throw Error("flip: u == v");
  if (u < 0 || v < 0 || u >= num_nodes() || v >= num_nodes()) throw Error("flip: node id out of range");
  const NodePair pair(u, v);
  const bool in_base = base_->has_edge(u, v);
  const bool was_toggled = toggled_.contains(pair);
  if (was_toggled) {
    toggled_.erase(pair);
    auto& bucket = in_base ? removed_ : added_;
    erase(bucket[u], v);
    erase(bucket[v], u);
  } else {
    toggled_.insert(pair);
    auto& bucket = in_base ? removed_ : added_;
    bucket[u].push_back(v);
    bucket[v].push_back(u);
  }
  return in_base == was_toggled;
}

Graph PerturbedGraph::materialize() const {
  if (toggled_.empty()) return *base_;
  std::vector<NodePair> edges;
  edges.reserve(base_->num_edges() + toggled_.size());
  for (const auto& e : base_->edge_list()) {
    if (!toggled_.contains(e)) edges.push_back(e);
  }
  for (const auto& p : toggled_) {
    if (!base_->has_edge(p.u, p.v)) edges.push_back(p);
  }
  return base_->with_edges(edges);
}

}  // namespace sga
