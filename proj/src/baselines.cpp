#include <chrono>
#include <functional>
#include <optional>
#include <unordered_set>

#include "sga/attacks.hpp"
#include "sga/error.hpp"
#include "sga/perturbed_graph.hpp"
#include "sga/random.hpp"

namespace sga {

namespace {

using PairFilter = std::function<bool(NodeId a, NodeId x)>;

// Shared driver for RA and DICE: each step picks an attacker uniformly, then
// tries a removal with probability p and an addition otherwise. When the
// drawn action has no eligible pair the other action is tried.
class RandomFlipper {
 public:
  RandomFlipper(const Graph& g, NodeId t, const AttackConfig& cfg, Strategy strategy, int budget,
                PairFilter removable, PairFilter addable)
      : g_(g),
        t_(t),
        cfg_(cfg),
        budget_(budget),
        current_(std::make_shared<const Graph>(g)),
        rng_(derive_seed(cfg.seed, static_cast<std::uint64_t>(t))),
        removable_(std::move(removable)),
        addable_(std::move(addable)) {
    cfg.validate();
    if (budget < 0) throw ConfigError("budget must be >= 0");
    if (t < 0 || t >= g.num_nodes()) throw Error("target out of range");
    if (cfg.mode == AttackMode::kInfluence) {
      if (g.degree(t) == 0) throw Error("influence attack on isolated target " + std::to_string(t));
      const auto n = g.neighbors(t);
      attackers_.assign(n.begin(), n.end());
    } else {
      attackers_ = {t};
    }
    out_.target = t;
    out_.budget = budget;
    out_.strategy = strategy;
  }

  Perturbation run() {
    const auto start = std::chrono::steady_clock::now();
    for (int step = 0; step < budget_; ++step) {
      const NodeId a = attackers_[uniform_index(rng_, attackers_.size())];
      const bool try_remove = uniform_real(rng_) < cfg_.p;
      std::optional<NodeId> x = try_remove ? pick_removal(a) : pick_addition(a);
      bool removing = try_remove;
      if (!x) {
        x = try_remove ? pick_addition(a) : pick_removal(a);
        removing = !try_remove;
      }
      if (!x) continue;
      current_.flip(a, *x);
      flipped_.insert(NodePair(a, *x));
      out_.flips.push_back({std::min(a, *x), std::max(a, *x),
                            removing ? FlipAction::kRemove : FlipAction::kAdd});
    }
    out_.partial = static_cast<int>(out_.flips.size()) < budget_;
    out_.peak_subgraph_edges = g_.num_edges();
    if (cfg_.timing) {
      out_.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return out_;
  }

 private:
  bool allowed(NodeId a, NodeId x) const {
    if (a == x) return false;
    if (cfg_.mode == AttackMode::kInfluence && x == t_) return false;
    return !flipped_.contains(NodePair(a, x));
  }

  std::optional<NodeId> pick_removal(NodeId a) {
    std::vector<NodeId> options;
    for (NodeId x : current_.neighbors(a)) {
      if (!allowed(a, x) || !removable_(a, x)) continue;
      if (cfg_.forbid_singletons && (current_.degree(a) <= 1 || current_.degree(x) <= 1)) continue;
      options.push_back(x);
    }
    if (options.empty()) return std::nullopt;
    return options[uniform_index(rng_, options.size())];
  }

  std::optional<NodeId> pick_addition(NodeId a) {
    auto eligible = [&](NodeId x) {
      return allowed(a, x) && !current_.has_edge(a, x) && addable_(a, x);
    };
    const auto n = static_cast<std::uint64_t>(g_.num_nodes());
    // Rejection sampling first; dense neighbourhoods or tight label
    // constraints fall through to an exact enumeration.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto x = static_cast<NodeId>(uniform_index(rng_, n));
      if (eligible(x)) return x;
    }
    std::vector<NodeId> options;
    for (NodeId x = 0; x < g_.num_nodes(); ++x) {
      if (eligible(x)) options.push_back(x);
    }
    if (options.empty()) return std::nullopt;
    return options[uniform_index(rng_, options.size())];
  }

  const Graph& g_;
  NodeId t_;
  const AttackConfig& cfg_;
  int budget_;
  PerturbedGraph current_;
  Rng rng_;
  PairFilter removable_;
  PairFilter addable_;
  std::vector<NodeId> attackers_;
  std::unordered_set<NodePair> flipped_;
  Perturbation out_;
};

}  // namespace

Perturbation random_attack(const Graph& g, NodeId t, const AttackConfig& cfg) {
  return random_attack(g, t, cfg, cfg.budget_for(g, t));
}

Perturbation random_attack(const Graph& g, NodeId t, const AttackConfig& cfg, int budget) {
  auto any = [](NodeId, NodeId) { return true; };
  return RandomFlipper(g, t, cfg, Strategy::kRandom, budget, any, any).run();
}

Perturbation dice_attack(const Graph& g, NodeId t, const AttackConfig& cfg) {
  return dice_attack(g, t, cfg, cfg.budget_for(g, t));
}

Perturbation dice_attack(const Graph& g, NodeId t, const AttackConfig& cfg, int budget) {
  auto same = [&g](NodeId a, NodeId x) { return g.label(a) == g.label(x); };
  auto different = [&g](NodeId a, NodeId x) { return g.label(a) != g.label(x); };
  return RandomFlipper(g, t, cfg, Strategy::kDice, budget, same, different).run();
}

}  // namespace sga
