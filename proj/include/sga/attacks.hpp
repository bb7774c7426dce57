#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sga/context.hpp"
#include "sga/gradient.hpp"
#include "sga/graph.hpp"
#include "sga/subgraph.hpp"

namespace sga {

enum class Strategy { kSga, kRandom, kDice, kGradArgmax };
enum class FlipAction { kAdd, kRemove };
enum class BudgetRule { kDegree, kFixed };

std::string to_string(Strategy s);
std::string to_string(AttackMode m);
Strategy parse_strategy(const std::string& name);  // sga|ra|dice|gradargmax, any case
AttackMode parse_mode(const std::string& name);    // direct|influence

struct Flip {
  NodeId u = 0;
  NodeId v = 0;
  FlipAction action = FlipAction::kAdd;

  friend bool operator==(const Flip&, const Flip&) = default;
};

struct Perturbation {
  NodeId target = 0;
  std::vector<Flip> flips;
  int budget = 0;
  Strategy strategy = Strategy::kSga;
  double elapsed_s = 0.0;
  std::size_t peak_subgraph_edges = 0;
  // Fewer than `budget` flips were produced.
  bool partial = false;

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

struct AttackConfig {
  AttackMode mode = AttackMode::kDirect;
  BudgetRule budget_rule = BudgetRule::kDegree;
  int fixed_budget = 1;
  int k = 2;
  double epsilon = 5.0;
  std::uint64_t seed = 42;
  bool forbid_singletons = false;
  bool stop_on_nonpositive = false;
  bool potential_prefilter = false;
  // Add/remove probability for RA and DICE.
  double p = 0.5;
  // Calibration used by GradArgmax; defaults to `epsilon`.
  std::optional<double> gradargmax_epsilon;
  // GradArgmax refuses graphs with more nodes than this.
  NodeId dense_limit = 5000;
  // Record wall-clock time in Perturbation::elapsed_s. Off by default so
  // that attack output is reproducible byte for byte.
  bool timing = false;

  void validate() const;
  // max(1, deg(t)) under the degree rule, fixed_budget otherwise.
  int budget_for(const Graph& g, NodeId t) const;
};

// Candidate pair -> dL/dA for every current candidate of `sub`.
std::map<NodePair, double> subgraph_gradient(const Subgraph& sub, const AttackContext& ctx, int c_t,
                                             int c_prime);

// +grad for absent pairs, -grad for present pairs.
std::map<NodePair, double> structure_score(const std::map<NodePair, double>& grads,
                                           const Subgraph& sub);

Perturbation sga_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg);
Perturbation sga_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg, int budget);

Perturbation random_attack(const Graph& g, NodeId t, const AttackConfig& cfg);
Perturbation random_attack(const Graph& g, NodeId t, const AttackConfig& cfg, int budget);

Perturbation dice_attack(const Graph& g, NodeId t, const AttackConfig& cfg);
Perturbation dice_attack(const Graph& g, NodeId t, const AttackConfig& cfg, int budget);

Perturbation gradargmax_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg);
Perturbation gradargmax_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg,
                               int budget);

// Dispatches on `strategy`.
Perturbation run_attack(Strategy strategy, const AttackContext& ctx, NodeId t,
                        const AttackConfig& cfg);

// n x n matrix of dL/dA_uv (symmetric entries tied) on the clean graph, built
// from dense matrices. Throws when n exceeds `dense_limit`.
Eigen::MatrixXd dense_gradient(const Graph& g, const Eigen::MatrixXd& projected, NodeId t, int k,
                               double epsilon, int c_t, int c_prime, NodeId dense_limit);

// JSON lines, one perturbation per line.
std::string to_json_line(const Perturbation& p);
Perturbation perturbation_from_json(const std::string& line);
void write_perturbations(const std::filesystem::path& path, const std::vector<Perturbation>& items);
std::vector<Perturbation> read_perturbations(const std::filesystem::path& path);

}  // namespace sga
