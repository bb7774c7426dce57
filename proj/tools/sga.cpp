// Command-line front end: train, attack, evaluate, bench, sbm, run.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sga/attacks.hpp"
#include "sga/checkpoint.hpp"
#include "sga/error.hpp"
#include "sga/experiment.hpp"
#include "sga/random.hpp"

namespace fs = std::filesystem;
using namespace sga;

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

struct DataFlags {
  std::string bundle;
  bool row_normalize = false;
  bool keep_all_components = false;

  void add(CLI::App* app) {
    app->add_option("--bundle", bundle, "Graph bundle directory")->required();
    app->add_flag("--row-normalize", row_normalize, "Row-normalize node features");
    app->add_flag("--keep-all-components", keep_all_components,
                  "Skip the largest-connected-component reduction");
  }

  std::shared_ptr<const Graph> load() const {
    DatasetSpec spec;
    spec.bundle = bundle;
    spec.row_normalize_features = row_normalize;
    spec.largest_component = !keep_all_components;
    return std::make_shared<const Graph>(load_dataset(spec));
  }
};

struct AttackFlags {
  DataFlags data;
  std::string surrogate;
  std::string strategy = "sga";
  std::string mode = "direct";
  int targets = 100;
  double epsilon = 5.0;
  std::optional<int> k;
  std::optional<int> budget;
  std::optional<std::uint64_t> seed;
  bool forbid_singletons = false;
  bool stop_on_nonpositive = false;
  bool prefilter = false;
  bool timing = false;
  int workers = 0;
  int dense_limit = 5000;
  std::string out;
  std::string dump_subgraph;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--surrogate", surrogate, "SGC checkpoint from `sga train`")->required();
    app->add_option("--strategy", strategy, "sga|ra|dice|gradargmax");
    app->add_option("--mode", mode, "direct|influence");
    app->add_option("--targets", targets, "Number of test nodes to attack");
    app->add_option("--epsilon", epsilon, "Calibration factor (>= 1)");
    app->add_option("--k", k, "Propagation radius (defaults to the surrogate's)");
    app->add_option("--budget", budget, "Fixed budget instead of the target degree");
    app->add_option("--seed", seed, "Attack seed (defaults to the checkpoint seed)");
    app->add_flag("--forbid-singletons", forbid_singletons, "Never remove a node's last edge");
    app->add_flag("--stop-on-nonpositive", stop_on_nonpositive, "Stop once no flip has positive score");
    app->add_flag("--potential-prefilter", prefilter, "Pre-filter large potential node sets");
    app->add_flag("--timing", timing, "Record wall-clock time per target");
    app->add_option("--workers", workers, "Worker threads (0 = all cores)");
    app->add_option("--dense-limit", dense_limit, "Largest graph GradArgmax accepts");
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--dump-subgraph", dump_subgraph,
                    "Write each SGA target's initial subgraph as JSON into this directory");
  }
};

struct Prepared {
  std::shared_ptr<const Graph> graph;
  Split split;
  std::unique_ptr<AttackContext> ctx;
  AttackConfig cfg;
  Strategy strategy;
  std::vector<NodeId> targets;
};

Prepared prepare_attack(const AttackFlags& f) {
  Prepared p;
  p.graph = f.data.load();
  const Checkpoint ck = load_checkpoint(f.surrogate);
  const auto* model = std::get_if<SurrogateModel>(&ck.model);
  if (!model) throw ConfigError("--surrogate must be an SGC checkpoint");
  p.split = random_split(*p.graph, ck.info.train_frac, ck.info.val_frac, ck.info.seed);

  p.cfg.mode = parse_mode(f.mode);
  p.cfg.k = f.k.value_or(model->k);
  p.cfg.epsilon = f.epsilon;
  p.cfg.seed = f.seed.value_or(ck.info.seed);
  if (f.budget) {
    p.cfg.budget_rule = BudgetRule::kFixed;
    p.cfg.fixed_budget = *f.budget;
  }
  p.cfg.forbid_singletons = f.forbid_singletons;
  p.cfg.stop_on_nonpositive = f.stop_on_nonpositive;
  p.cfg.potential_prefilter = f.prefilter;
  p.cfg.timing = f.timing;
  p.cfg.dense_limit = f.dense_limit;
  p.cfg.validate();
  if (p.cfg.k != model->k) {
    throw ConfigError("--k " + std::to_string(p.cfg.k) + " differs from the surrogate's k=" +
                      std::to_string(model->k));
  }
  p.strategy = parse_strategy(f.strategy);
  p.ctx = std::make_unique<AttackContext>(p.graph, *model, f.epsilon);
  p.targets = sample_targets(p.split, f.targets, derive_seed(p.cfg.seed, 7));
  return p;
}

void dump_subgraphs(const Prepared& p, const fs::path& dir) {
  fs::create_directories(dir);
  for (NodeId t : p.targets) {
    Subgraph sub = extract_khop(p.graph, t, p.cfg.k, p.cfg.mode);
    SubgraphOptions options;
    options.forbid_singletons = p.cfg.forbid_singletons;
    options.potential_prefilter = p.cfg.potential_prefilter;
    add_potential_edges(sub, *p.ctx, p.cfg.budget_for(*p.graph, t), options);
    std::ofstream out(dir / ("subgraph_" + std::to_string(t) + ".json"));
    out << sub.debug_json() << '\n';
  }
}

int cmd_train(const DataFlags& data, const std::string& model, int k, int hidden, std::uint64_t seed,
              double train_frac, double val_frac, std::optional<int> epochs,
              std::optional<double> lr, const std::string& out) {
  const auto g = data.load();
  const Split split = random_split(*g, train_frac, val_frac, seed);
  Checkpoint ck;
  ck.info = {seed, train_frac, val_frac};
  Eigen::MatrixXd probs;
  if (model == "sgc") {
    TrainConfig cfg = default_sgc_config();
    cfg.seed = seed;
    if (epochs) cfg.epochs = *epochs;
    if (lr) cfg.learning_rate = *lr;
    SurrogateModel m = train_sgc(*g, split, k, cfg);
    probs = predict_full(*g, m);
    ck.model = m;
  } else if (model == "gcn") {
    TrainConfig cfg = default_gcn_config();
    cfg.seed = seed;
    if (epochs) cfg.epochs = *epochs;
    if (lr) cfg.learning_rate = *lr;
    GcnModel m = train_gcn(*g, split, hidden, cfg);
    probs = gcn_predict_full(*g, m);
    ck.model = m;
  } else {
    throw ConfigError("--model must be sgc or gcn");
  }
  save_checkpoint(out, ck);
  std::size_t hits = 0;
  for (NodeId u : split.test) {
    Eigen::Index best = 0;
    probs.row(u).maxCoeff(&best);
    if (best == g->label(u)) ++hits;
  }
  std::printf("nodes=%d edges=%zu test_accuracy=%.4f\n", g->num_nodes(), g->num_edges(),
              split.test.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(split.test.size()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simplified gradient-based attack on graph node classifiers"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a surrogate SGC or a GCN");
  DataFlags train_data;
  train_data.add(train);
  std::string train_model = "sgc";
  int train_k = 2;
  int train_hidden = 16;
  std::uint64_t train_seed = 42;
  double train_frac = 0.1;
  double val_frac = 0.1;
  std::optional<int> train_epochs;
  std::optional<double> train_lr;
  std::string train_out;
  train->add_option("--model", train_model, "sgc|gcn");
  train->add_option("--k", train_k, "SGC propagation depth");
  train->add_option("--hidden", train_hidden, "GCN hidden width");
  train->add_option("--seed", train_seed, "Split and initialization seed");
  train->add_option("--train-frac", train_frac, "Training fraction");
  train->add_option("--val-frac", val_frac, "Validation fraction");
  train->add_option("--epochs", train_epochs, "Training epochs");
  train->add_option("--lr", train_lr, "Learning rate");
  train->add_option("--out", train_out, "Checkpoint path")->required();

  // attack / bench
  auto* attack = app.add_subcommand("attack", "Generate perturbations for sampled test targets");
  AttackFlags attack_flags;
  attack_flags.add(attack);
  auto* bench = app.add_subcommand("bench", "Time attacks per target (single thread)");
  AttackFlags bench_flags;
  bench_flags.add(bench);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Retrain a victim on each perturbed graph");
  DataFlags eval_data;
  eval_data.add(evaluate);
  std::string eval_perturbations;
  std::string eval_victim = "sgc";
  std::string eval_out;
  std::uint64_t eval_seed = 42;
  double eval_train_frac = 0.1;
  double eval_val_frac = 0.1;
  int eval_hidden = 16;
  int eval_workers = 0;
  evaluate->add_option("--perturbations", eval_perturbations, "JSON lines file")->required();
  evaluate->add_option("--victim", eval_victim, "sgc|gcn");
  evaluate->add_option("--out", eval_out, "Report directory")->required();
  evaluate->add_option("--seed", eval_seed, "Split and training seed");
  evaluate->add_option("--train-frac", eval_train_frac, "Training fraction");
  evaluate->add_option("--val-frac", eval_val_frac, "Validation fraction");
  evaluate->add_option("--hidden", eval_hidden, "GCN hidden width");
  evaluate->add_option("--workers", eval_workers, "Worker threads (0 = all cores)");

  // sbm
  auto* sbm = app.add_subcommand("sbm", "Write a stochastic block model bundle");
  std::vector<int> sbm_blocks;
  SbmSpec sbm_spec;
  std::string sbm_out;
  sbm->add_option("--blocks", sbm_blocks, "Block sizes, comma separated")->required()->delimiter(',');
  sbm->add_option("--pin", sbm_spec.p_in, "Within-block edge probability");
  sbm->add_option("--pout", sbm_spec.p_out, "Between-block edge probability");
  sbm->add_option("--features", sbm_spec.feature_dim, "Feature dimension");
  sbm->add_option("--noise", sbm_spec.feature_noise, "Feature noise standard deviation");
  sbm->add_option("--degree-exponent", sbm_spec.degree_exponent, "Pareto exponent (0 disables)");
  sbm->add_option("--seed", sbm_spec.seed, "Generator seed");
  sbm->add_option("--out", sbm_out, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Run a full experiment from a JSON config");
  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_strategy;
  std::optional<std::string> run_mode;
  std::optional<std::string> run_victim;
  std::optional<int> run_targets;
  std::optional<int> run_workers;
  std::optional<std::string> run_out;
  run->add_option("--config", run_config, "Experiment config")->required();
  run->add_option("--seed", run_seed, "Override seed");
  run->add_option("--strategy", run_strategy, "Override strategy");
  run->add_option("--mode", run_mode, "Override mode");
  run->add_option("--victim", run_victim, "Override victim");
  run->add_option("--targets", run_targets, "Override target count");
  run->add_option("--workers", run_workers, "Override worker count");
  run->add_option("--out", run_out, "Override output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*train) {
      return cmd_train(train_data, train_model, train_k, train_hidden, train_seed, train_frac, val_frac,
                       train_epochs, train_lr, train_out);
    }
    if (*attack) {
      const Prepared p = prepare_attack(attack_flags);
      if (!attack_flags.dump_subgraph.empty()) dump_subgraphs(p, attack_flags.dump_subgraph);
      std::vector<TargetFailure> failures;
      const auto results = attack_targets(p.strategy, *p.ctx, p.targets, p.cfg, attack_flags.workers, &failures);
      std::vector<Perturbation> items;
      for (const auto& r : results) {
        if (r) items.push_back(*r);
      }
      write_perturbations(fs::path(attack_flags.out) / "perturbations.jsonl", items);
      for (const auto& f : failures) std::fprintf(stderr, "target %d failed: %s\n", f.target, f.message.c_str());
      std::printf("wrote %zu perturbations to %s\n", items.size(),
                  (fs::path(attack_flags.out) / "perturbations.jsonl").c_str());
      return 0;
    }
    if (*bench) {
      const Prepared p = prepare_attack(bench_flags);
      const BenchResult r = bench_attack(*p.ctx, p.strategy, p.targets, p.cfg);
      const std::string table = bench_table(std::span<const BenchResult>(&r, 1));
      fs::create_directories(bench_flags.out);
      std::ofstream(fs::path(bench_flags.out) / "bench.tsv") << table;
      std::cout << table;
      return 0;
    }
    if (*evaluate) {
      const auto g = eval_data.load();
      const Split split = random_split(*g, eval_train_frac, eval_val_frac, eval_seed);
      VictimSpec victim;
      victim.kind = parse_victim(eval_victim);
      victim.hidden = eval_hidden;
      victim.train = victim.kind == Victim::kSgc ? default_sgc_config() : default_gcn_config();
      victim.train.seed = eval_seed;
      const auto items = read_perturbations(eval_perturbations);
      AttackReport report = evaluate_perturbations(*g, split, victim, items, eval_workers);
      report.seed = eval_seed;
      emit_report(report, eval_out);
      const auto& a = report.aggregate;
      std::printf("targets=%zu accuracy_on_targets=%s dac=%s\n", report.per_target.size(),
                  a.accuracy_on_targets ? std::to_string(*a.accuracy_on_targets).c_str() : "null",
                  a.dac ? std::to_string(*a.dac).c_str() : "null");
      return 0;
    }
    if (*sbm) {
      sbm_spec.block_sizes = sbm_blocks;
      const Graph g = generate_sbm(sbm_spec);
      save_graph_bundle(g, sbm_out, "sbm");
      std::printf("nodes=%d edges=%zu\n", g.num_nodes(), g.num_edges());
      return 0;
    }
    if (*run) {
      ExperimentConfig cfg = load_experiment_config(run_config);
      if (run_seed) {
        cfg.seed = *run_seed;
        cfg.attack.seed = *run_seed;
        cfg.surrogate_train.seed = *run_seed;
        cfg.victim.train.seed = *run_seed;
      }
      if (run_strategy) cfg.strategy = parse_strategy(*run_strategy);
      if (run_mode) cfg.attack.mode = parse_mode(*run_mode);
      if (run_victim) {
        cfg.victim.kind = parse_victim(*run_victim);
        const auto seed = cfg.victim.train.seed;
        cfg.victim.train = cfg.victim.kind == Victim::kSgc ? default_sgc_config() : default_gcn_config();
        cfg.victim.train.seed = seed;
      }
      if (run_targets) cfg.n_targets = *run_targets;
      if (run_workers) cfg.workers = *run_workers;
      if (run_out) cfg.output = *run_out;
      if (cfg.output.empty()) throw ConfigError("no output directory (set 'output' or --out)");
      const AttackReport report = run_experiment(cfg);
      emit_report(report, cfg.output);
      const auto& a = report.aggregate;
      std::printf("targets=%zu failures=%zu accuracy_on_targets=%s dac=%s\n", report.per_target.size(),
                  report.failures.size(),
                  a.accuracy_on_targets ? std::to_string(*a.accuracy_on_targets).c_str() : "null",
                  a.dac ? std::to_string(*a.dac).c_str() : "null");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeExit;
  }
  return 0;
}
