#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sga/attacks.hpp"
#include "sga/graph.hpp"
#include "sga/models.hpp"

namespace sga {

enum class Victim { kSgc, kGcn };

std::string to_string(Victim v);
Victim parse_victim(const std::string& name);  // sgc|gcn

// Either a bundle directory or an SBM recipe.
struct DatasetSpec {
  std::optional<std::filesystem::path> bundle;
  std::optional<SbmSpec> sbm;
  bool row_normalize_features = false;
  bool largest_component = true;
};

Graph load_dataset(const DatasetSpec& spec);

struct VictimSpec {
  Victim kind = Victim::kSgc;
  int hidden = 16;  // GCN only
  int k = 2;        // SGC only
  TrainConfig train = default_sgc_config();
};

struct ExperimentConfig {
  DatasetSpec dataset;
  Strategy strategy = Strategy::kSga;
  int n_targets = 100;
  VictimSpec victim;
  AttackConfig attack;
  TrainConfig surrogate_train = default_sgc_config();
  double train_frac = 0.1;
  double val_frac = 0.1;
  std::uint64_t seed = 42;
  int workers = 0;  // 0: one per hardware thread
  std::filesystem::path output;

  void validate() const;
};

// JSON mirror of ExperimentConfig. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& cfg);

struct TargetOutcome {
  NodeId target = 0;
  int label = 0;
  int clean_prediction = 0;
  int poisoned_prediction = 0;
  double clean_cm = 0.0;
  double poisoned_cm = 0.0;
  bool success = false;
  Perturbation perturbation;

  friend bool operator==(const TargetOutcome&, const TargetOutcome&) = default;
};

struct TargetFailure {
  NodeId target = 0;
  std::string message;

  friend bool operator==(const TargetFailure&, const TargetFailure&) = default;
};

struct ReportAggregate {
  std::optional<double> accuracy_on_targets;
  std::optional<double> mean_cm;
  std::optional<double> dac;
  std::optional<double> r_clean;
  std::optional<double> mean_time_s;
  std::optional<double> mean_peak_edges;

  friend bool operator==(const ReportAggregate&, const ReportAggregate&) = default;
};

struct AttackReport {
  std::string strategy;
  std::string mode;
  std::string victim;
  std::uint64_t seed = 0;
  // Hash of the split and victim training configuration shared by the clean
  // and every poisoned retrain.
  std::string config_hash;
  std::optional<double> surrogate_test_accuracy;
  std::optional<double> victim_clean_test_accuracy;
  std::vector<TargetOutcome> per_target;
  std::vector<TargetFailure> failures;
  ReportAggregate aggregate;

  friend bool operator==(const AttackReport&, const AttackReport&) = default;
};

// Uniform sample of `count` test nodes without replacement.
std::vector<NodeId> sample_targets(const Split& split, int count, std::uint64_t seed);

// Runs `strategy` for every target. Failures are appended to `failures` and
// leave an empty slot (std::nullopt) in the result.
std::vector<std::optional<Perturbation>> attack_targets(Strategy strategy, const AttackContext& ctx,
                                                        std::span<const NodeId> targets,
                                                        const AttackConfig& cfg, int workers,
                                                        std::vector<TargetFailure>* failures);

// Trains the victim on the clean graph, then retrains it from scratch on each
// perturbed graph and records the target's prediction.
AttackReport evaluate_perturbations(const Graph& g, const Split& split, const VictimSpec& victim,
                                    std::span<const Perturbation> perturbations, int workers);

std::string config_hash(const Split& split, const VictimSpec& victim);

// Full pipeline: dataset, split, surrogate, targets, attacks, poisoned
// retrains, aggregation.
AttackReport run_experiment(const ExperimentConfig& cfg);

// Writes report.json and summary.csv into `dir`.
void emit_report(const AttackReport& report, const std::filesystem::path& dir);
AttackReport load_report(const std::filesystem::path& dir);
std::string report_json(const AttackReport& report);

struct BenchResult {
  std::string strategy;
  NodeId num_nodes = 0;
  std::size_t num_edges = 0;
  int n_targets = 0;
  int completed = 0;
  double mean_time_s = 0.0;
  double max_time_s = 0.0;
  double mean_peak_edges = 0.0;
  std::size_t max_peak_edges = 0;
  bool size_guarded = false;
  std::string message;
};

// Attack-only timing on one thread; surrogate training is excluded.
BenchResult bench_attack(const ExperimentConfig& cfg);
BenchResult bench_attack(const AttackContext& ctx, Strategy strategy, std::span<const NodeId> targets,
                         const AttackConfig& cfg);
std::string bench_table(std::span<const BenchResult> rows);

}  // namespace sga
