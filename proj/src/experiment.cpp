#include "sga/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <variant>
#include <cctype>

#include <json.hpp>

#include "sga/error.hpp"
#include "sga/metrics.hpp"
#include "sga/parallel.hpp"
#include "sga/random.hpp"

namespace sga {

using json = nlohmann::ordered_json;

std::string to_string(Victim v) { return v == Victim::kSgc ? "SGC" : "GCN"; }

Victim parse_victim(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "sgc") return Victim::kSgc;
  if (s == "gcn") return Victim::kGcn;
  throw ConfigError("unknown victim '" + name + "'");
}

Graph load_dataset(const DatasetSpec& spec) {
  if (spec.bundle.has_value() == spec.sbm.has_value()) {
    throw ConfigError("dataset needs exactly one of 'bundle' or 'sbm'");
  }
  Graph g;
  if (spec.bundle) {
    g = load_graph_bundle(*spec.bundle, BundleOptions{spec.row_normalize_features});
  } else {
    g = generate_sbm(*spec.sbm);
  }
  return spec.largest_component ? largest_connected_component(g) : g;
}

void ExperimentConfig::validate() const {
  if (n_targets < 0) throw ConfigError("n_targets must be >= 0");
  if (victim.hidden < 1) throw ConfigError("hidden must be >= 1");
  if (victim.k < 1) throw ConfigError("victim k must be >= 1");
  victim.train.validate();
  surrogate_train.validate();
  attack.validate();
  if (!(train_frac > 0.0 && train_frac < 1.0 && val_frac > 0.0 && val_frac < 1.0 &&
        train_frac + val_frac < 1.0)) {
    throw ConfigError("train_frac and val_frac must lie in (0, 1) and sum to less than 1");
  }
}

// ---------------------------------------------------------------------------
// Config JSON

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

std::string optimizer_name(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "gd"; }

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "gd" || name == "sgd") return Optimizer::kGradientDescent;
  throw ConfigError("unknown optimizer '" + name + "'");
}

void read_train(const json& j, TrainConfig& cfg, const std::string& where) {
  check_keys(j, {"learning_rate", "epochs", "weight_decay", "seed", "early_stop_patience", "optimizer"},
             where);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.early_stop_patience = j.value("early_stop_patience", cfg.early_stop_patience);
  if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(j["optimizer"].get<std::string>());
}

json write_train(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.learning_rate},     {"epochs", cfg.epochs},
              {"weight_decay", cfg.weight_decay},       {"seed", cfg.seed},
              {"early_stop_patience", cfg.early_stop_patience},
              {"optimizer", optimizer_name(cfg.optimizer)}};
}

SbmSpec read_sbm(const json& j) {
  check_keys(j, {"blocks", "p_in", "p_out", "feature_dim", "feature_noise", "degree_exponent", "seed"},
             "dataset.sbm");
  SbmSpec spec;
  spec.block_sizes = j.at("blocks").get<std::vector<int>>();
  spec.p_in = j.value("p_in", spec.p_in);
  spec.p_out = j.value("p_out", spec.p_out);
  spec.feature_dim = j.value("feature_dim", spec.feature_dim);
  spec.feature_noise = j.value("feature_noise", spec.feature_noise);
  spec.degree_exponent = j.value("degree_exponent", spec.degree_exponent);
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

json write_sbm(const SbmSpec& spec) {
  return json{{"blocks", spec.block_sizes},         {"p_in", spec.p_in},
              {"p_out", spec.p_out},                {"feature_dim", spec.feature_dim},
              {"feature_noise", spec.feature_noise}, {"degree_exponent", spec.degree_exponent},
              {"seed", spec.seed}};
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    check_keys(j, {"dataset", "strategy", "mode", "n_targets", "victim", "hidden", "victim_k", "attack",
                   "surrogate_train", "victim_train", "train_frac", "val_frac", "seed", "workers",
                   "output"},
               "config");
    cfg.seed = j.value("seed", cfg.seed);
    cfg.attack.seed = cfg.seed;
    cfg.surrogate_train.seed = cfg.seed;

    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      check_keys(d, {"bundle", "sbm", "row_normalize_features", "largest_component"}, "dataset");
      if (d.contains("bundle")) cfg.dataset.bundle = d["bundle"].get<std::string>();
      if (d.contains("sbm")) cfg.dataset.sbm = read_sbm(d["sbm"]);
      cfg.dataset.row_normalize_features = d.value("row_normalize_features", false);
      cfg.dataset.largest_component = d.value("largest_component", true);
    }
    if (j.contains("strategy")) cfg.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("mode")) cfg.attack.mode = parse_mode(j["mode"].get<std::string>());
    cfg.n_targets = j.value("n_targets", cfg.n_targets);
    if (j.contains("victim")) cfg.victim.kind = parse_victim(j["victim"].get<std::string>());
    cfg.victim.train = cfg.victim.kind == Victim::kSgc ? default_sgc_config() : default_gcn_config();
    cfg.victim.train.seed = cfg.seed;
    cfg.victim.hidden = j.value("hidden", cfg.victim.hidden);
    cfg.victim.k = j.value("victim_k", cfg.victim.k);

    if (j.contains("attack")) {
      const auto& a = j["attack"];
      check_keys(a, {"budget", "k", "epsilon", "seed", "forbid_singletons", "stop_on_nonpositive",
                     "potential_prefilter", "p", "gradargmax_epsilon", "dense_limit", "timing"},
                 "attack");
      if (a.contains("budget")) {
        if (a["budget"].is_string()) {
          if (a["budget"].get<std::string>() != "degree") throw ConfigError("budget must be 'degree' or an integer");
          cfg.attack.budget_rule = BudgetRule::kDegree;
        } else {
          cfg.attack.budget_rule = BudgetRule::kFixed;
          cfg.attack.fixed_budget = a["budget"].get<int>();
        }
      }
      cfg.attack.k = a.value("k", cfg.attack.k);
      cfg.attack.epsilon = a.value("epsilon", cfg.attack.epsilon);
      cfg.attack.seed = a.value("seed", cfg.attack.seed);
      cfg.attack.forbid_singletons = a.value("forbid_singletons", cfg.attack.forbid_singletons);
      cfg.attack.stop_on_nonpositive = a.value("stop_on_nonpositive", cfg.attack.stop_on_nonpositive);
      cfg.attack.potential_prefilter = a.value("potential_prefilter", cfg.attack.potential_prefilter);
      cfg.attack.p = a.value("p", cfg.attack.p);
      if (a.contains("gradargmax_epsilon") && !a["gradargmax_epsilon"].is_null()) {
        cfg.attack.gradargmax_epsilon = a["gradargmax_epsilon"].get<double>();
      }
      cfg.attack.dense_limit = a.value("dense_limit", cfg.attack.dense_limit);
      cfg.attack.timing = a.value("timing", cfg.attack.timing);
    }
    if (j.contains("surrogate_train")) read_train(j["surrogate_train"], cfg.surrogate_train, "surrogate_train");
    if (j.contains("victim_train")) read_train(j["victim_train"], cfg.victim.train, "victim_train");
    cfg.train_frac = j.value("train_frac", cfg.train_frac);
    cfg.val_frac = j.value("val_frac", cfg.val_frac);
    cfg.workers = j.value("workers", cfg.workers);
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json j;
  json d;
  if (cfg.dataset.bundle) d["bundle"] = cfg.dataset.bundle->string();
  if (cfg.dataset.sbm) d["sbm"] = write_sbm(*cfg.dataset.sbm);
  d["row_normalize_features"] = cfg.dataset.row_normalize_features;
  d["largest_component"] = cfg.dataset.largest_component;
  j["dataset"] = d;
  j["strategy"] = to_string(cfg.strategy);
  j["mode"] = to_string(cfg.attack.mode);
  j["n_targets"] = cfg.n_targets;
  j["victim"] = to_string(cfg.victim.kind);
  j["hidden"] = cfg.victim.hidden;
  j["victim_k"] = cfg.victim.k;
  json a;
  if (cfg.attack.budget_rule == BudgetRule::kDegree) {
    a["budget"] = "degree";
  } else {
    a["budget"] = cfg.attack.fixed_budget;
  }
  a["k"] = cfg.attack.k;
  a["epsilon"] = cfg.attack.epsilon;
  a["seed"] = cfg.attack.seed;
  a["forbid_singletons"] = cfg.attack.forbid_singletons;
  a["stop_on_nonpositive"] = cfg.attack.stop_on_nonpositive;
  a["potential_prefilter"] = cfg.attack.potential_prefilter;
  a["p"] = cfg.attack.p;
  a["gradargmax_epsilon"] = cfg.attack.gradargmax_epsilon ? json(*cfg.attack.gradargmax_epsilon) : json(nullptr);
  a["dense_limit"] = cfg.attack.dense_limit;
  a["timing"] = cfg.attack.timing;
  j["attack"] = a;
  j["surrogate_train"] = write_train(cfg.surrogate_train);
  j["victim_train"] = write_train(cfg.victim.train);
  j["train_frac"] = cfg.train_frac;
  j["val_frac"] = cfg.val_frac;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["output"] = cfg.output.string();
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Pipeline

std::vector<NodeId> sample_targets(const Split& split, int count, std::uint64_t seed) {
  if (count < 0) throw ConfigError("target count must be >= 0");
  if (static_cast<std::size_t>(count) > split.test.size()) {
    throw ConfigError("requested " + std::to_string(count) + " targets but the test set has " +
                      std::to_string(split.test.size()) + " nodes");
  }
  std::vector<NodeId> pool = split.test;
  Rng rng(seed);
  shuffle(pool, rng);
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

std::vector<std::optional<Perturbation>> attack_targets(Strategy strategy, const AttackContext& ctx,
                                                        std::span<const NodeId> targets,
                                                        const AttackConfig& cfg, int workers,
                                                        std::vector<TargetFailure>* failures) {
  std::vector<std::optional<Perturbation>> out(targets.size());
  std::vector<std::string> errors(targets.size());
  parallel_for(targets.size(), resolve_workers(workers), [&](std::size_t i) {
    try {
      out[i] = run_attack(strategy, ctx, targets[i], cfg);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "attack failed";
    }
  });
  if (failures) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (!errors[i].empty()) failures->push_back({targets[i], errors[i]});
    }
  }
  return out;
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Trained victim reduced to what evaluation needs.
struct TrainedVictim {
  std::variant<SurrogateModel, GcnModel> model;

  Eigen::VectorXd predict(const Graph& g, NodeId t) const {
    if (const auto* sgc = std::get_if<SurrogateModel>(&model)) {
      const NodeId rows[] = {t};
      return predict_rows(g, *sgc, rows).row(0).transpose();
    }
    return gcn_predict_full(g, std::get<GcnModel>(model)).row(t).transpose();
  }

  Eigen::MatrixXd predict_all(const Graph& g) const {
    if (const auto* sgc = std::get_if<SurrogateModel>(&model)) return predict_full(g, *sgc);
    return gcn_predict_full(g, std::get<GcnModel>(model));
  }
};

TrainedVictim train_victim(const Graph& g, const Split& split, const VictimSpec& victim) {
  if (victim.kind == Victim::kSgc) return {train_sgc(g, split, victim.k, victim.train)};
  return {train_gcn(g, split, victim.hidden, victim.train)};
}

int argmax(const Eigen::VectorXd& row) {
  Eigen::Index best = 0;
  row.maxCoeff(&best);
  return static_cast<int>(best);
}

double accuracy(const Eigen::MatrixXd& probs, const Graph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t hits = 0;
  for (NodeId u : nodes) {
    if (argmax(probs.row(u).transpose()) == g.label(u)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

void aggregate(AttackReport& report, const Graph& g, std::span<const Perturbation> perturbations) {
  auto& agg = report.aggregate;
  const auto& rows = report.per_target;
  try {
    const auto r = dac(g, perturbations);
    agg.r_clean = r.r_clean;
    agg.dac = r.dac;
  } catch (const Error&) {
    // Regular or assortativity-neutral graphs leave DAC undefined.
  }
  if (rows.empty()) return;
  const double count = static_cast<double>(rows.size());
  double correct = 0.0;
  double cm = 0.0;
  double time = 0.0;
  double peak = 0.0;
  for (const auto& row : rows) {
    if (row.poisoned_prediction == row.label) correct += 1.0;
    cm += row.poisoned_cm;
    time += row.perturbation.elapsed_s;
    peak += static_cast<double>(row.perturbation.peak_subgraph_edges);
  }
  agg.accuracy_on_targets = correct / count;
  agg.mean_cm = cm / count;
  agg.mean_time_s = time / count;
  agg.mean_peak_edges = peak / count;
}

}  // namespace

std::string config_hash(const Split& split, const VictimSpec& victim) {
  std::ostringstream text;
  auto list = [&](const std::vector<NodeId>& ids) {
    for (NodeId u : ids) text << u << ',';
    text << ';';
  };
  list(split.train);
  list(split.validation);
  list(split.test);
  const auto& t = victim.train;
  text << to_string(victim.kind) << ';' << victim.hidden << ';' << victim.k << ';' << t.learning_rate
       << ';' << t.epochs << ';' << t.weight_decay << ';' << t.seed << ';' << t.early_stop_patience
       << ';' << optimizer_name(t.optimizer);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text.str())));
  return buf;
}

AttackReport evaluate_perturbations(const Graph& g, const Split& split, const VictimSpec& victim,
                                    std::span<const Perturbation> perturbations, int workers) {
  AttackReport report;
  report.victim = to_string(victim.kind);
  report.config_hash = config_hash(split, victim);
  if (!perturbations.empty()) {
    report.strategy = to_string(perturbations.front().strategy);
  }

  const TrainedVictim clean = train_victim(g, split, victim);
  const Eigen::MatrixXd clean_probs = clean.predict_all(g);
  report.victim_clean_test_accuracy = accuracy(clean_probs, g, split.test);

  std::vector<std::optional<TargetOutcome>> rows(perturbations.size());
  std::vector<std::string> errors(perturbations.size());
  parallel_for(perturbations.size(), resolve_workers(workers), [&](std::size_t i) {
    const Perturbation& p = perturbations[i];
    try {
      const NodeId t = p.target;
      if (t < 0 || t >= g.num_nodes()) throw Error("target out of range");
      TargetOutcome row;
      row.target = t;
      row.label = g.label(t);
      const Eigen::VectorXd before = clean_probs.row(t).transpose();
      row.clean_prediction = argmax(before);
      row.clean_cm = classification_margin(before, row.label);
      Eigen::VectorXd after = before;
      if (!p.flips.empty()) {
        // Training is deterministic, so an unchanged graph reproduces the
        // clean victim exactly and needs no retrain.
        const Graph poisoned = apply_flips(g, p);
        after = train_victim(poisoned, split, victim).predict(poisoned, t);
      }
      row.poisoned_prediction = argmax(after);
      row.poisoned_cm = classification_margin(after, row.label);
      row.success = row.poisoned_cm < 0.0;
      row.perturbation = p;
      rows[i] = std::move(row);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<Perturbation> kept;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]) {
      kept.push_back(rows[i]->perturbation);
      report.per_target.push_back(std::move(*rows[i]));
    } else {
      report.failures.push_back({perturbations[i].target, errors[i]});
    }
  }
  aggregate(report, g, kept);
  return report;
}

AttackReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto graph = std::make_shared<const Graph>(load_dataset(cfg.dataset));
  const Split split = random_split(*graph, cfg.train_frac, cfg.val_frac, cfg.seed);

  SurrogateModel surrogate = train_sgc(*graph, split, cfg.attack.k, cfg.surrogate_train);
  const AttackContext ctx(graph, surrogate, cfg.attack.epsilon);
  const auto targets = sample_targets(split, cfg.n_targets, derive_seed(cfg.seed, 7));

  std::vector<TargetFailure> failures;
  const auto attacked = attack_targets(cfg.strategy, ctx, targets, cfg.attack, cfg.workers, &failures);
  std::vector<Perturbation> perturbations;
  for (const auto& p : attacked) {
    if (p) perturbations.push_back(*p);
  }

  AttackReport report = evaluate_perturbations(*graph, split, cfg.victim, perturbations, cfg.workers);
  report.strategy = to_string(cfg.strategy);
  report.mode = to_string(cfg.attack.mode);
  report.seed = cfg.seed;
  report.surrogate_test_accuracy = accuracy(ctx.clean_probs(), *graph, split.test);
  failures.insert(failures.end(), report.failures.begin(), report.failures.end());
  report.failures = std::move(failures);
  return report;
}

// ---------------------------------------------------------------------------
// Benchmark

BenchResult bench_attack(const AttackContext& ctx, Strategy strategy, std::span<const NodeId> targets,
                         const AttackConfig& cfg) {
  BenchResult result;
  result.strategy = to_string(strategy);
  result.num_nodes = ctx.graph().num_nodes();
  result.num_edges = ctx.graph().num_edges();
  result.n_targets = static_cast<int>(targets.size());
  AttackConfig timed = cfg;
  timed.timing = true;
  double total_time = 0.0;
  double total_peak = 0.0;
  for (NodeId t : targets) {
    Perturbation p;
    try {
      p = run_attack(strategy, ctx, t, timed);
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.find("too large") != std::string::npos) {
        result.size_guarded = true;
        result.message = what;
        break;
      }
      if (result.message.empty()) result.message = what;
      continue;
    }
    ++result.completed;
    total_time += p.elapsed_s;
    total_peak += static_cast<double>(p.peak_subgraph_edges);
    result.max_time_s = std::max(result.max_time_s, p.elapsed_s);
    result.max_peak_edges = std::max(result.max_peak_edges, p.peak_subgraph_edges);
  }
  if (result.completed > 0) {
    result.mean_time_s = total_time / result.completed;
    result.mean_peak_edges = total_peak / result.completed;
  }
  return result;
}

BenchResult bench_attack(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto graph = std::make_shared<const Graph>(load_dataset(cfg.dataset));
  const Split split = random_split(*graph, cfg.train_frac, cfg.val_frac, cfg.seed);
  SurrogateModel surrogate = train_sgc(*graph, split, cfg.attack.k, cfg.surrogate_train);
  const AttackContext ctx(graph, surrogate, cfg.attack.epsilon);
  const auto targets = sample_targets(split, cfg.n_targets, derive_seed(cfg.seed, 7));
  return bench_attack(ctx, cfg.strategy, targets, cfg.attack);
}

std::string bench_table(std::span<const BenchResult> rows) {
  std::ostringstream out;
  out << "strategy\tn\tedges\ttargets\tcompleted\tmean_time_s\tmax_time_s\tmean_peak_edges\t"
         "max_peak_edges\tpeak_edge_fraction\tnote\n";
  for (const auto& r : rows) {
    const double fraction = r.num_edges == 0 ? 0.0 : r.mean_peak_edges / static_cast<double>(r.num_edges);
    out << r.strategy << '\t' << r.num_nodes << '\t' << r.num_edges << '\t' << r.n_targets << '\t'
        << r.completed << '\t' << r.mean_time_s << '\t' << r.max_time_s << '\t' << r.mean_peak_edges
        << '\t' << r.max_peak_edges << '\t' << fraction << '\t'
        << (r.size_guarded ? "size-guarded" : r.message) << '\n';
  }
  return out.str();
}

}  // namespace sga
