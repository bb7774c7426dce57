#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sga {

using NodeId = std::int32_t;

using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Unordered node pair, always stored with u < v.
struct NodePair {
  NodeId u = 0;
  NodeId v = 0;

  NodePair() = default;
  NodePair(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
  }
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

// Immutable undirected attributed graph in CSR form. Features and labels are
// shared between graphs that differ only in structure (perturbed copies).
class Graph {
 public:
  Graph() = default;

  // Builds a graph from an edge list. Duplicates and symmetric repeats are
  // merged; self-loops and out-of-range ids throw.
  Graph(NodeId num_nodes, std::span<const NodePair> edges, FeatureMatrix features,
        std::vector<int> labels, int num_classes);

  NodeId num_nodes() const { return n_; }
  std::size_t num_edges() const { return adjacency_.size() / 2; }
  int num_classes() const { return data_->num_classes; }
  int num_features() const { return static_cast<int>(data_->features.cols()); }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {adjacency_.data() + offsets_[u],
            static_cast<std::size_t>(offsets_[u + 1] - offsets_[u])};
  }
  int degree(NodeId u) const { return degrees_[u]; }
  std::span<const int> degrees() const { return degrees_; }
  int max_degree() const;
  bool has_edge(NodeId u, NodeId v) const;

  const FeatureMatrix& features() const { return data_->features; }
  const SparseRowMatrix& sparse_features() const { return data_->sparse_features; }
  std::span<const int> labels() const { return data_->labels; }
  int label(NodeId u) const { return data_->labels[u]; }

  // Sorted list of undirected edges with u < v.
  std::vector<NodePair> edge_list() const;

  // Same nodes, features and labels; different edge set.
  Graph with_edges(std::span<const NodePair> edges) const;

  // Subgraph induced by `nodes` (relabelled 0..|nodes|-1 in the given order).
  Graph induced(std::span<const NodeId> nodes) const;

  bool same_structure(const Graph& other) const;

 private:
  struct NodeData {
    FeatureMatrix features;
    SparseRowMatrix sparse_features;
    std::vector<int> labels;
    int num_classes = 0;
  };

  Graph(NodeId num_nodes, std::span<const NodePair> edges,
        std::shared_ptr<const NodeData> data);
  void build_csr(std::span<const NodePair> edges);

  NodeId n_ = 0;
  std::vector<std::int64_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<int> degrees_;
  std::shared_ptr<const NodeData> data_;
};

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> validation;
  std::vector<NodeId> test;
};

struct BundleOptions {
  bool row_normalize_features = false;
};

// Reads `edges.tsv`, `features.csv`, `labels.csv` and optional `meta.json`.
Graph load_graph_bundle(const std::filesystem::path& dir, const BundleOptions& options = {});

// Writes a bundle readable by load_graph_bundle.
void save_graph_bundle(const Graph& g, const std::filesystem::path& dir,
                       const std::string& name = "graph");

// Induced subgraph on the largest component. Ties go to the component that
// contains the smallest node id; relabelling keeps the original order.
Graph largest_connected_component(const Graph& g);

// Unweighted distances from `source` for every node within `radius` hops.
std::map<NodeId, int> bfs_within(const Graph& g, NodeId source, int radius);

// Returns a copy of `g` with (u, v) toggled.
Graph flip_edge(const Graph& g, NodeId u, NodeId v);

Split random_split(const Graph& g, double train_frac, double val_frac, std::uint64_t seed);

struct SbmSpec {
  std::vector<int> block_sizes;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 16;
  // Standard deviation of the Gaussian noise added to block-indicator features.
  double feature_noise = 1.0;
  // Degree-corrected variant: node propensities drawn from a Pareto tail with
  // this exponent. Zero disables degree correction.
  double degree_exponent = 0.0;
  std::uint64_t seed = 0;
};

Graph generate_sbm(const SbmSpec& spec);

}  // namespace sga

template <>
struct std::hash<sga::NodePair> {
  std::size_t operator()(const sga::NodePair& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.key());
  }
};
