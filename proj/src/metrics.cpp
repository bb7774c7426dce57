#include "sga/metrics.hpp"

#include <cmath>
#include <unordered_set>

#include "sga/error.hpp"
#include "sga/perturbed_graph.hpp"

namespace sga {

DegreeMixing degree_mixing(const Graph& g) {
  if (g.num_edges() == 0) throw Error("degree mixing of a graph without edges");
  DegreeMixing m;
  const double w = 1.0 / (2.0 * static_cast<double>(g.num_edges()));
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const int du = g.degree(u);
    for (NodeId v : g.neighbors(u)) {
      // Visiting every adjacency entry yields both orientations of each edge.
      const int dv = g.degree(v);
      m.joint[{du, dv}] += w;
      m.row_marginal[du] += w;
      m.column_marginal[dv] += w;
    }
  }
  return m;
}

double assortativity(const DegreeMixing& m) {
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (const auto& [i, a] : m.row_marginal) mean_a += i * a;
  for (const auto& [j, b] : m.column_marginal) mean_b += j * b;
  double var_a = 0.0;
  double var_b = 0.0;
  for (const auto& [i, a] : m.row_marginal) var_a += a * (i - mean_a) * (i - mean_a);
  for (const auto& [j, b] : m.column_marginal) var_b += b * (j - mean_b) * (j - mean_b);
  if (m.row_marginal.size() < 2 || m.column_marginal.size() < 2 || var_a <= 0.0 || var_b <= 0.0) {
    throw Error("undefined assortativity: endpoint degrees have zero variance");
  }
  double cov = 0.0;
  for (const auto& [key, p] : m.joint) cov += p * (key.first - mean_a) * (key.second - mean_b);
  return cov / std::sqrt(var_a * var_b);
}

double assortativity(const Graph& g) { return assortativity(degree_mixing(g)); }

Graph apply_flips(const Graph& g, const Perturbation& p) {
  PerturbedGraph current(std::make_shared<const Graph>(g));
  std::unordered_set<NodePair> seen;
  for (const auto& f : p.flips) {
    if (!seen.insert(NodePair(f.u, f.v)).second) {
      throw Error("pair (" + std::to_string(f.u) + "," + std::to_string(f.v) + ") flipped twice");
    }
    const bool present = current.has_edge(f.u, f.v);
    if (present != (f.action == FlipAction::kRemove)) {
      throw Error("flip (" + std::to_string(f.u) + "," + std::to_string(f.v) +
                  ") does not match the graph state");
    }
    current.flip(f.u, f.v);
  }
  return current.materialize();
}

AssortativityReport dac(const Graph& clean, std::span<const Perturbation> perturbations) {
  AssortativityReport report;
  report.r_clean = assortativity(clean);
  if (report.r_clean == 0.0) throw Error("DAC undefined: clean assortativity is zero");
  double total = 0.0;
  for (const auto& p : perturbations) {
    const double r = p.flips.empty() ? report.r_clean : assortativity(apply_flips(clean, p));
    report.per_target_r.push_back(r);
    total += std::abs(report.r_clean - r);
  }
  if (!perturbations.empty()) {
    report.dac = total / static_cast<double>(perturbations.size()) / std::abs(report.r_clean);
  }
  return report;
}

}  // namespace sga
