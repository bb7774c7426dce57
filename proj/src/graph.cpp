#include "sga/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "sga/error.hpp"
#include "sga/random.hpp"

namespace sga {

namespace {

SparseRowMatrix to_sparse(const FeatureMatrix& dense) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) triplets.emplace_back(i, j, dense(i, j));
    }
  }
  SparseRowMatrix sparse(dense.rows(), dense.cols());
  sparse.setFromTriplets(triplets.begin(), triplets.end());
  sparse.makeCompressed();
  return sparse;
}

}  // namespace

Graph::Graph(NodeId num_nodes, std::span<const NodePair> edges, FeatureMatrix features,
             std::vector<int> labels, int num_classes) {
  if (num_nodes < 0) throw Error("negative node count");
  if (features.rows() != num_nodes) {
    throw Error("feature row count " + std::to_string(features.rows()) +
                " does not match node count " + std::to_string(num_nodes));
  }
  if (static_cast<NodeId>(labels.size()) != num_nodes) {
    throw Error("label count does not match node count");
  }
  if (num_classes <= 0 && num_nodes > 0) throw Error("class count must be positive");
  for (int c : labels) {
    if (c < 0 || c >= num_classes) {
      throw Error("label " + std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  auto data = std::make_shared<NodeData>();
  data->sparse_features = to_sparse(features);
  data->features = std::move(features);
  data->labels = std::move(labels);
  data->num_classes = num_classes;
  data_ = std::move(data);
  n_ = num_nodes;
  build_csr(edges);
}

Graph::Graph(NodeId num_nodes, std::span<const NodePair> edges,
             std::shared_ptr<const NodeData> data)
    : n_(num_nodes), data_(std::move(data)) {
  build_csr(edges);
}

void Graph::build_csr(std::span<const NodePair> edges) {
  std::vector<NodePair> unique;
  unique.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u < 0 || e.v >= n_) {
      throw Error("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                  ") has a node id out of range");
    }
    if (e.u == e.v) throw Error("self-loop on node " + std::to_string(e.u));
    unique.emplace_back(e.u, e.v);
  }
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  degrees_.assign(n_, 0);
  for (const auto& e : unique) {
    ++degrees_[e.u];
    ++degrees_[e.v];
  }
  offsets_.assign(n_ + 1, 0);
  for (NodeId u = 0; u < n_; ++u) offsets_[u + 1] = offsets_[u] + degrees_[u];
  adjacency_.assign(offsets_[n_], 0);
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  // Pairs are sorted by (u, v), so each row fills in ascending order for the
  // v side; the u side is sorted below.
  for (const auto& e : unique) {
    adjacency_[cursor[e.u]++] = e.v;
    adjacency_[cursor[e.v]++] = e.u;
  }
  for (NodeId u = 0; u < n_; ++u) {
    std::sort(adjacency_.begin() + offsets_[u], adjacency_.begin() + offsets_[u + 1]);
  }
}

int Graph::max_degree() const {
  return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (degree(u) > degree(v)) std::swap(u, v);
  const auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<NodePair> Graph::edge_list() const {
  std::vector<NodePair> edges;
  edges.reserve(num_edges());
  for (NodeId u = 0; u < n_; ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return edges;
}

Graph Graph::with_edges(std::span<const NodePair> edges) const {
  return Graph(n_, edges, data_);
}

Graph Graph::induced(std::span<const NodeId> nodes) const {
  std::vector<NodeId> remap(n_, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) remap[nodes[i]] = static_cast<NodeId>(i);

  std::vector<NodePair> edges;
  for (NodeId u : nodes) {
    for (NodeId v : neighbors(u)) {
      if (u < v && remap[v] >= 0) edges.emplace_back(remap[u], remap[v]);
    }
  }
  FeatureMatrix features(static_cast<Eigen::Index>(nodes.size()), data_->features.cols());
  std::vector<int> labels(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) = data_->features.row(nodes[i]);
    labels[i] = data_->labels[nodes[i]];
  }
  return Graph(static_cast<NodeId>(nodes.size()), edges, std::move(features), std::move(labels),
               data_->num_classes);
}

bool Graph::same_structure(const Graph& other) const {
  return n_ == other.n_ && offsets_ == other.offsets_ && adjacency_ == other.adjacency_;
}

Graph largest_connected_component(const Graph& g) {
  const NodeId n = g.num_nodes();
  if (n == 0) throw Error("largest_connected_component: empty graph");

  std::vector<int> component(n, -1);
  int best = -1;
  std::size_t best_size = 0;
  int count = 0;
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < n; ++s) {
    if (component[s] >= 0) continue;
    queue.assign(1, s);
    component[s] = count;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (NodeId v : g.neighbors(queue[head])) {
        if (component[v] < 0) {
          component[v] = count;
          queue.push_back(v);
        }
      }
    }
    // Components are discovered in order of their smallest node id, so a
    // strict comparison keeps the earliest one on ties.
    if (queue.size() > best_size) {
      best_size = queue.size();
      best = count;
    }
    ++count;
  }

  std::vector<NodeId> keep;
  keep.reserve(best_size);
  for (NodeId u = 0; u < n; ++u) {
    if (component[u] == best) keep.push_back(u);
  }
  return g.induced(keep);
}

std::map<NodeId, int> bfs_within(const Graph& g, NodeId source, int radius) {
  if (source < 0 || source >= g.num_nodes()) {
    throw Error("bfs_within: source " + std::to_string(source) + " out of range");
  }
  if (radius < 0) throw Error("bfs_within: negative radius");
  std::map<NodeId, int> dist{{source, 0}};
  std::vector<NodeId> frontier{source};
  for (int hop = 1; hop <= radius && !frontier.empty(); ++hop) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId v : g.neighbors(u)) {
        if (dist.emplace(v, hop).second) next.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

Graph flip_edge(const Graph& g, NodeId u, NodeId v) {
  if (u == v) throw Error("flip_edge: u == v");
  if (u < 0 || v < 0 || u >= g.num_nodes() || v >= g.num_nodes()) {
    throw Error("flip_edge: node id out of range");
  }
  auto edges = g.edge_list();
  const NodePair pair(u, v);
  auto it = std::lower_bound(edges.begin(), edges.end(), pair);
  if (it != edges.end() && *it == pair) {
    edges.erase(it);
  } else {
    edges.insert(it, pair);
  }
  return g.with_edges(edges);
}

Split random_split(const Graph& g, double train_frac, double val_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0) || !(val_frac > 0.0 && val_frac < 1.0) ||
      train_frac + val_frac >= 1.0) {
    throw ConfigError("random_split: fractions must lie in (0,1) and sum to less than 1");
  }
  const NodeId n = g.num_nodes();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);

  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * n));
  const auto n_val = static_cast<std::size_t>(std::llround(val_frac * n));
  Split split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace sga
