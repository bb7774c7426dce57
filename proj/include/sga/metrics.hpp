#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sga/attacks.hpp"
#include "sga/graph.hpp"

namespace sga {

// Joint distribution of (degree, degree) over directed edge endpoints, keyed
// sparsely by degree value.
struct DegreeMixing {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> row_marginal;     // a_i
  std::map<int, double> column_marginal;  // b_j
};

DegreeMixing degree_mixing(const Graph& g);

// Pearson correlation of endpoint degrees. Throws when either endpoint degree
// sequence is constant.
double assortativity(const Graph& g);
double assortativity(const DegreeMixing& m);

struct AssortativityReport {
  double r_clean = 0.0;
  std::vector<double> per_target_r;
  double dac = 0.0;
};

// Mean |r_clean - r_i| / |r_clean| over the perturbed graphs.
AssortativityReport dac(const Graph& clean, std::span<const Perturbation> perturbations);

// Applies the flips in order, checking that each action matches the current
// state and that no pair repeats.
Graph apply_flips(const Graph& g, const Perturbation& p);

}  // namespace sga
