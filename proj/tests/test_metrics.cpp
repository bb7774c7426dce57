#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sga/error.hpp"
#include "sga/metrics.hpp"

using namespace sga;

TEST(Assortativity, StarAndPath) {
  EXPECT_NEAR(assortativity(fixture::star(3)), -1.0, 1e-12);
  EXPECT_NEAR(oracle::brute_force_pearson(fixture::star(3)), -1.0, 1e-12);
  EXPECT_NEAR(assortativity(fixture::path(4)), -0.5, 1e-12);
  EXPECT_NEAR(oracle::brute_force_pearson(fixture::path(4)), -0.5, 1e-12);
}

TEST(Assortativity, RegularGraphIsUndefined) {
  try {
    assortativity(fixture::cycle(5));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("undefined assortativity"), std::string::npos);
  }
  EXPECT_THROW(degree_mixing(fixture::make(3, {})), Error);
}

TEST(Assortativity, MatchesPearsonOracle) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Graph g = oracle::random_graph(30 + static_cast<int>(seed % 40), 0.05 + 0.002 * seed, 1, 2, seed);
    if (g.num_edges() < 2) continue;
    double expected = 0.0;
    try {
      expected = oracle::brute_force_pearson(g);
    } catch (...) {
      continue;
    }
    if (!std::isfinite(expected)) continue;
    EXPECT_NEAR(assortativity(g), expected, 1e-10) << "seed " << seed;
    ++checked;
  }
  EXPECT_GE(checked, 95);
}

TEST(Mixing, PathExample) {
  const DegreeMixing m = degree_mixing(fixture::path(4));
  ASSERT_EQ(m.joint.size(), 3u);
  EXPECT_NEAR(m.joint.at({1, 2}), 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.joint.at({2, 1}), 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.joint.at({2, 2}), 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.row_marginal.at(1), 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.row_marginal.at(2), 2.0 / 3, 1e-15);
}

TEST(Mixing, MarginalsAreConsistent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DegreeMixing m = degree_mixing(oracle::random_graph(80, 0.06, 1, 2, seed));
    double total = 0.0;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (const auto& [key, p] : m.joint) {
      total += p;
      rows[key.first] += p;
      cols[key.second] += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (const auto& [d, a] : m.row_marginal) {
      EXPECT_NEAR(rows[d], a, 1e-12);
      EXPECT_NEAR(m.column_marginal.at(d), a, 1e-12);  // undirected: symmetric
    }
    EXPECT_EQ(rows.size(), m.row_marginal.size());
    EXPECT_EQ(cols.size(), m.column_marginal.size());
  }
}

TEST(Dac, PathToStar) {
  const Graph p4 = fixture::path(4);
  Perturbation p;
  p.target = 1;
  p.flips = {{2, 3, FlipAction::kRemove}, {1, 3, FlipAction::kAdd}};
  p.budget = 2;
  const std::vector<Perturbation> all{p};
  const AssortativityReport report = dac(p4, all);
  EXPECT_NEAR(report.r_clean, -0.5, 1e-12);
  ASSERT_EQ(report.per_target_r.size(), 1u);
  EXPECT_NEAR(report.per_target_r[0], -1.0, 1e-12);
  EXPECT_NEAR(report.dac, 1.0, 1e-12);
}

TEST(Dac, EmptySetIsZero) {
  const Graph g = oracle::random_graph(50, 0.1, 1, 2, 3);
  const AssortativityReport report = dac(g, {});
  EXPECT_EQ(report.dac, 0.0);
  EXPECT_TRUE(report.per_target_r.empty());

  Perturbation none;
  none.target = 4;
  const std::vector<Perturbation> unchanged{none, none};
  EXPECT_EQ(dac(g, unchanged).dac, 0.0);
}

TEST(Dac, MeanOverTargets) {
  const Graph g = oracle::random_graph(40, 0.1, 1, 2, 8);
  std::vector<Perturbation> items;
  double expected = 0.0;
  const double r = oracle::brute_force_pearson(g);
  for (NodeId t = 0; t < 4; ++t) {
    Perturbation p;
    p.target = t;
    const NodeId x = 20 + t;
    p.flips = {{t, x, g.has_edge(t, x) ? FlipAction::kRemove : FlipAction::kAdd}};
    expected += std::abs(r - oracle::brute_force_pearson(flip_edge(g, t, x)));
    items.push_back(p);
  }
  expected /= 4.0 * std::abs(r);
  EXPECT_NEAR(dac(g, items).dac, expected, 1e-10);
}

TEST(ApplyFlips, RejectsMismatchAndRepeats) {
  const Graph g = fixture::path(4);
  Perturbation bad;
  bad.flips = {{0, 1, FlipAction::kAdd}};
  EXPECT_THROW(apply_flips(g, bad), Error);
  Perturbation repeat;
  repeat.flips = {{0, 2, FlipAction::kAdd}, {0, 2, FlipAction::kRemove}};
  EXPECT_THROW(apply_flips(g, repeat), Error);
  Perturbation ok;
  ok.flips = {{0, 1, FlipAction::kRemove}, {0, 3, FlipAction::kAdd}};
  const Graph h = apply_flips(g, ok);
  EXPECT_FALSE(h.has_edge(0, 1));
  EXPECT_TRUE(h.has_edge(0, 3));
}
