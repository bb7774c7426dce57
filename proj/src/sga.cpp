#include <algorithm>
#include <cctype>
#include <chrono>

#include "sga/attacks.hpp"
#include "sga/error.hpp"

namespace sga {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kSga: return "SGA";
    case Strategy::kRandom: return "RA";
    case Strategy::kDice: return "DICE";
    case Strategy::kGradArgmax: return "GradArgmax";
  }
  return "?";
}

std::string to_string(AttackMode m) { return m == AttackMode::kDirect ? "direct" : "influence"; }

Strategy parse_strategy(const std::string& name) {
  const std::string s = lower(name);
  if (s == "sga") return Strategy::kSga;
  if (s == "ra" || s == "random") return Strategy::kRandom;
  if (s == "dice") return Strategy::kDice;
  if (s == "gradargmax") return Strategy::kGradArgmax;
  throw ConfigError("unknown strategy '" + name + "'");
}

AttackMode parse_mode(const std::string& name) {
  const std::string s = lower(name);
  if (s == "direct") return AttackMode::kDirect;
  if (s == "influence") return AttackMode::kInfluence;
  throw ConfigError("unknown attack mode '" + name + "'");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 1.0)) throw ConfigError("epsilon must be >= 1");
  if (gradargmax_epsilon && !(*gradargmax_epsilon >= 1.0)) {
    throw ConfigError("gradargmax_epsilon must be >= 1");
  }
  if (k < 1) throw ConfigError("k must be >= 1");
  if (budget_rule == BudgetRule::kFixed && fixed_budget < 1) {
    throw ConfigError("fixed budget must be >= 1");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
  if (dense_limit < 1) throw ConfigError("dense_limit must be >= 1");
}

int AttackConfig::budget_for(const Graph& g, NodeId t) const {
  if (budget_rule == BudgetRule::kFixed) return fixed_budget;
  return std::max(1, g.degree(t));
}

std::map<NodePair, double> subgraph_gradient(const Subgraph& sub, const AttackContext& ctx, int c_t,
                                             int c_prime) {
  GradientKernel kernel(sub, ctx, c_t, c_prime);
  std::map<NodePair, double> out;
  for (const auto& pair : sub.candidates()) out.emplace(pair, kernel.pair_gradient(pair));
  return out;
}

std::map<NodePair, double> structure_score(const std::map<NodePair, double>& grads,
                                           const Subgraph& sub) {
  std::map<NodePair, double> out;
  for (const auto& [pair, grad] : grads) {
    out.emplace(pair, sub.current().has_edge(pair.u, pair.v) ? -grad : grad);
  }
  return out;
}

Perturbation sga_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg) {
  return sga_attack(ctx, t, cfg, cfg.budget_for(ctx.graph(), t));
}

Perturbation sga_attack(const AttackContext& ctx, NodeId t, const AttackConfig& cfg, int budget) {
  cfg.validate();
  if (cfg.k != ctx.k()) {
    throw ConfigError("attack k=" + std::to_string(cfg.k) + " but surrogate was trained with k=" +
                      std::to_string(ctx.k()));
  }
  if (budget < 0) throw ConfigError("budget must be >= 0");
  const auto start = std::chrono::steady_clock::now();

  Perturbation out;
  out.target = t;
  out.budget = budget;
  out.strategy = Strategy::kSga;

  const Graph& g = ctx.graph();
  const int c_t = g.label(t);
  const int c_prime = ctx.runner_up(t);

  Subgraph sub = extract_khop(ctx.graph_ptr(), t, cfg.k, cfg.mode);
  SubgraphOptions options;
  options.forbid_singletons = cfg.forbid_singletons;
  options.potential_prefilter = cfg.potential_prefilter;
  add_potential_edges(sub, ctx, budget, options);

  for (int step = 0; step < budget; ++step) {
    GradientKernel kernel(sub, ctx, c_t, c_prime);
    const auto& current = sub.current();
    bool found = false;
    double best_score = 0.0;
    NodePair best;
    for (const auto& pair : sub.candidates()) {
      const bool present = current.has_edge(pair.u, pair.v);
      if (present && cfg.forbid_singletons &&
          (current.degree(pair.u) <= 1 || current.degree(pair.v) <= 1)) {
        continue;
      }
      const double grad = kernel.pair_gradient(pair);
      const double score = present ? -grad : grad;
      if (!found || score > best_score) {
        found = true;
        best_score = score;
        best = pair;
      }
    }
    if (!found) break;
    if (cfg.stop_on_nonpositive && best_score <= 0.0) break;
    const bool present = current.has_edge(best.u, best.v);
    apply_flip_and_expand(sub, best);
    out.flips.push_back({best.u, best.v, present ? FlipAction::kRemove : FlipAction::kAdd});
  }

  out.partial = static_cast<int>(out.flips.size()) < budget;
  out.peak_subgraph_edges = sub.peak_stored_edges();
  if (cfg.timing) {
    out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

Perturbation run_attack(Strategy strategy, const AttackContext& ctx, NodeId t,
                        const AttackConfig& cfg) {
  switch (strategy) {
    case Strategy::kSga: return sga_attack(ctx, t, cfg);
    case Strategy::kRandom: return random_attack(ctx.graph(), t, cfg);
    case Strategy::kDice: return dice_attack(ctx.graph(), t, cfg);
    case Strategy::kGradArgmax: return gradargmax_attack(ctx, t, cfg);
  }
  throw Error("unknown strategy");
}

}  // namespace sga
