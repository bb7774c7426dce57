#include <algorithm>
#include <cmath>
#include <numeric>

#include "sga/error.hpp"
#include "sga/graph.hpp"
#include "sga/random.hpp"

namespace sga {

namespace {

// Visits a Bernoulli(p) subset of [0, count) by geometric skipping.
template <typename Visit>
void sample_indices(std::uint64_t count, double p, Rng& rng, Visit&& visit) {
  if (p <= 0.0 || count == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < count; ++i) visit(i);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t index = 0;
  while (true) {
    double u = uniform_real(rng);
    while (u <= 0.0) u = uniform_real(rng);
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(count - index)) return;
    index += static_cast<std::uint64_t>(skip);
    visit(index);
    if (++index >= count) return;
  }
}

// Plain SBM: every within-block pair with p_in, every cross-block pair with p_out.
void plain_edges(const SbmSpec& spec, const std::vector<NodeId>& first, Rng& rng,
                 std::vector<NodePair>& edges) {
  const std::size_t blocks = spec.block_sizes.size();
  for (std::size_t a = 0; a < blocks; ++a) {
    const std::uint64_t sa = spec.block_sizes[a];
    sample_indices(sa * (sa - 1) / 2, spec.p_in, rng, [&](std::uint64_t idx) {
      // Row-major enumeration of the strict upper triangle.
      auto i = static_cast<std::uint64_t>(
          (2.0 * sa - 1.0 - std::sqrt((2.0 * sa - 1.0) * (2.0 * sa - 1.0) - 8.0 * idx)) / 2.0);
      auto row_start = [&](std::uint64_t r) { return r * (2 * sa - r - 1) / 2; };
      while (i > 0 && row_start(i) > idx) --i;
      while (row_start(i + 1) <= idx) ++i;
      const std::uint64_t j = i + 1 + (idx - row_start(i));
      edges.emplace_back(first[a] + static_cast<NodeId>(i), first[a] + static_cast<NodeId>(j));
    });
    for (std::size_t b = a + 1; b < blocks; ++b) {
      const std::uint64_t sb = spec.block_sizes[b];
      sample_indices(sa * sb, spec.p_out, rng, [&](std::uint64_t idx) {
        edges.emplace_back(first[a] + static_cast<NodeId>(idx / sb),
                           first[b] + static_cast<NodeId>(idx % sb));
      });
    }
  }
}

// Degree-corrected SBM: the expected number of edges per block pair matches
// the plain model; endpoints are drawn proportionally to heavy-tailed node
// propensities.
void degree_corrected_edges(const SbmSpec& spec, const std::vector<NodeId>& first, Rng& rng,
                            std::vector<NodePair>& edges) {
  const std::size_t blocks = spec.block_sizes.size();
  const NodeId n = first.back();
  std::vector<double> theta(n);
  for (auto& t : theta) {
    double u = uniform_real(rng);
    while (u <= 0.0) u = uniform_real(rng);
    t = std::pow(u, -1.0 / spec.degree_exponent);
  }
  std::vector<std::vector<double>> cumulative(blocks);
  for (std::size_t a = 0; a < blocks; ++a) {
    auto& c = cumulative[a];
    c.resize(spec.block_sizes[a]);
    std::partial_sum(theta.begin() + first[a], theta.begin() + first[a + 1], c.begin());
  }
  auto draw = [&](std::size_t block) {
    const auto& c = cumulative[block];
    const double x = uniform_real(rng) * c.back();
    const auto pos = std::upper_bound(c.begin(), c.end(), x) - c.begin();
    return first[block] + static_cast<NodeId>(std::min<std::ptrdiff_t>(pos, c.size() - 1));
  };
  auto poisson = [&](double mean) {
    // Normal approximation is adequate for the large means used here.
    if (mean > 64.0) {
      return static_cast<std::uint64_t>(std::max(0.0, std::round(mean + std::sqrt(mean) * standard_normal(rng))));
    }
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform_real(rng);
    while (prod > limit) {
      ++k;
      prod *= uniform_real(rng);
    }
    return k;
  };
  for (std::size_t a = 0; a < blocks; ++a) {
    for (std::size_t b = a; b < blocks; ++b) {
      const double sa = spec.block_sizes[a];
      const double sb = spec.block_sizes[b];
      const double mean = a == b ? spec.p_in * sa * (sa - 1) / 2 : spec.p_out * sa * sb;
      const auto count = poisson(mean);
      for (std::uint64_t e = 0; e < count; ++e) {
        const NodeId u = draw(a);
        const NodeId v = draw(b);
        if (u != v) edges.emplace_back(u, v);
      }
    }
  }
}

}  // namespace

Graph generate_sbm(const SbmSpec& spec) {
  if (spec.block_sizes.empty()) throw ConfigError("generate_sbm: no blocks");
  for (int s : spec.block_sizes) {
    if (s <= 0) throw ConfigError("generate_sbm: empty block");
  }
  if (!(spec.p_out >= 0.0 && spec.p_out < spec.p_in && spec.p_in <= 1.0)) {
    throw ConfigError("generate_sbm: require 0 <= p_out < p_in <= 1");
  }
  if (spec.feature_dim <= 0) throw ConfigError("generate_sbm: feature_dim must be positive");

  const std::size_t blocks = spec.block_sizes.size();
  std::vector<NodeId> first(blocks + 1, 0);
  for (std::size_t a = 0; a < blocks; ++a) first[a + 1] = first[a] + spec.block_sizes[a];
  const NodeId n = first.back();

  Rng rng(spec.seed);
  std::vector<NodePair> edges;
  if (spec.degree_exponent > 0.0) {
    degree_corrected_edges(spec, first, rng, edges);
  } else {
    plain_edges(spec, first, rng, edges);
  }

  std::vector<int> labels(n);
  FeatureMatrix features(n, spec.feature_dim);
  for (std::size_t a = 0; a < blocks; ++a) {
    for (NodeId u = first[a]; u < first[a + 1]; ++u) {
      labels[u] = static_cast<int>(a);
      for (int j = 0; j < spec.feature_dim; ++j) {
        features(u, j) = spec.feature_noise * standard_normal(rng);
      }
      features(u, static_cast<int>(a % spec.feature_dim)) += 1.0;
    }
  }
  return Graph(n, edges, std::move(features), std::move(labels), static_cast<int>(blocks));
}

}  // namespace sga
