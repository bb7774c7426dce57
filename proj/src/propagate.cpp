#include <cmath>
#include <unordered_map>

#include "sga/error.hpp"
#include "sga/models.hpp"

namespace sga {

Eigen::MatrixXd normalized_propagate(const Graph& g, int k, const Eigen::MatrixXd& m) {
  const NodeId n = g.num_nodes();
  if (m.rows() != n) throw Error("normalized_propagate: row count does not match node count");
  if (k < 0) throw Error("normalized_propagate: negative depth");

  Eigen::VectorXd norm(n);
  for (NodeId u = 0; u < n; ++u) norm[u] = 1.0 / std::sqrt(g.degree(u) + 1.0);

  Eigen::MatrixXd current = m;
  Eigen::MatrixXd next(m.rows(), m.cols());
  for (int step = 0; step < k; ++step) {
    // Scale rows by D̃^{-1/2}, sum over closed neighbourhoods, scale again.
    current = norm.asDiagonal() * current;
    for (NodeId u = 0; u < n; ++u) {
      next.row(u) = current.row(u);
      for (NodeId v : g.neighbors(u)) next.row(u) += current.row(v);
    }
    current = norm.asDiagonal() * next;
  }
  return current;
}

SparseRowMatrix normalized_adjacency(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * g.num_edges() + n);
  for (NodeId u = 0; u < n; ++u) {
    const double du = g.degree(u) + 1.0;
    triplets.emplace_back(u, u, 1.0 / du);
    for (NodeId v : g.neighbors(u)) {
      triplets.emplace_back(u, v, 1.0 / std::sqrt(du * (g.degree(v) + 1.0)));
    }
  }
  SparseRowMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

SparseRowMatrix propagated_feature_rows(const Graph& g, int k, std::span<const NodeId> rows) {
  const NodeId n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> triplets;
  std::unordered_map<NodeId, double> current;
  std::unordered_map<NodeId, double> next;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    current.clear();
    current.emplace(rows[r], 1.0);
    for (int step = 0; step < k; ++step) {
      next.clear();
      for (const auto& [u, value] : current) {
        const double du = g.degree(u) + 1.0;
        next[u] += value / du;
        for (NodeId v : g.neighbors(u)) next[v] += value / std::sqrt(du * (g.degree(v) + 1.0));
      }
      std::swap(current, next);
    }
    for (const auto& [u, value] : current) triplets.emplace_back(static_cast<int>(r), u, value);
  }
  SparseRowMatrix walk(static_cast<Eigen::Index>(rows.size()), n);
  walk.setFromTriplets(triplets.begin(), triplets.end());
  SparseRowMatrix out = walk * g.sparse_features();
  out.makeCompressed();
  return out;
}

void softmax_rows(Eigen::MatrixXd& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - mx).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

double classification_margin(std::span<const double> probs, int true_class) {
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= probs.size()) {
    throw Error("classification_margin: class out of range");
  }
  double other = -1.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (static_cast<int>(c) != true_class) other = std::max(other, probs[c]);
  }
  if (probs.size() == 1) other = 0.0;
  return probs[true_class] - other;
}

double classification_margin(const Eigen::VectorXd& probs, int true_class) {
  return classification_margin(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())),
                               true_class);
}

int best_other_class(const Eigen::VectorXd& row, int excluded) {
  int best = -1;
  for (Eigen::Index c = 0; c < row.size(); ++c) {
    if (c == excluded) continue;
    if (best < 0 || row[c] > row[best]) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace sga
