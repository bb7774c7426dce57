#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sga/error.hpp"
#include "sga/experiment.hpp"

namespace sga {

using json = nlohmann::ordered_json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

json perturbation_json(const Perturbation& p) { return json::parse(to_json_line(p)); }

}  // namespace

std::string report_json(const AttackReport& report) {
  json j;
  j["strategy"] = report.strategy;
  j["mode"] = report.mode;
  j["victim"] = report.victim;
  j["seed"] = report.seed;
  j["config_hash"] = report.config_hash;
  j["surrogate_test_accuracy"] = optional_number(report.surrogate_test_accuracy);
  j["victim_clean_test_accuracy"] = optional_number(report.victim_clean_test_accuracy);
  const auto& a = report.aggregate;
  j["aggregate"] = json{{"accuracy_on_targets", optional_number(a.accuracy_on_targets)},
                        {"mean_cm", optional_number(a.mean_cm)},
                        {"dac", optional_number(a.dac)},
                        {"r_clean", optional_number(a.r_clean)},
                        {"mean_time_s", optional_number(a.mean_time_s)},
                        {"mean_peak_edges", optional_number(a.mean_peak_edges)}};
  auto& rows = j["per_target"] = json::array();
  for (const auto& r : report.per_target) {
    rows.push_back(json{{"target", r.target},
                        {"label", r.label},
                        {"clean_prediction", r.clean_prediction},
                        {"poisoned_prediction", r.poisoned_prediction},
                        {"clean_cm", r.clean_cm},
                        {"poisoned_cm", r.poisoned_cm},
                        {"success", r.success},
                        {"perturbation", perturbation_json(r.perturbation)}});
  }
  auto& failures = j["failures"] = json::array();
  for (const auto& f : report.failures) failures.push_back(json{{"target", f.target}, {"message", f.message}});
  return j.dump(2);
}

void emit_report(const AttackReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / "report.json").string());
    out << report_json(report) << '\n';
  }
  std::ofstream csv(dir / "summary.csv", std::ios::binary);
  if (!csv) throw Error("cannot write " + (dir / "summary.csv").string());
  csv << "target,label,clean_prediction,poisoned_prediction,clean_cm,poisoned_cm,success,num_flips,"
         "budget,elapsed_s,peak_subgraph_edges\n";
  csv.precision(17);
  for (const auto& r : report.per_target) {
    csv << r.target << ',' << r.label << ',' << r.clean_prediction << ',' << r.poisoned_prediction << ','
        << r.clean_cm << ',' << r.poisoned_cm << ',' << (r.success ? 1 : 0) << ','
        << r.perturbation.flips.size() << ',' << r.perturbation.budget << ',' << r.perturbation.elapsed_s
        << ',' << r.perturbation.peak_subgraph_edges << '\n';
  }
  if (!csv) throw Error("write failed: " + (dir / "summary.csv").string());
}

AttackReport load_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "report.json", std::ios::binary);
  if (!in) throw Error("cannot open " + (dir / "report.json").string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  AttackReport report;
  try {
    const json j = json::parse(buffer.str());
    report.strategy = j.at("strategy").get<std::string>();
    report.mode = j.at("mode").get<std::string>();
    report.victim = j.at("victim").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.surrogate_test_accuracy = read_optional(j, "surrogate_test_accuracy");
    report.victim_clean_test_accuracy = read_optional(j, "victim_clean_test_accuracy");
    const auto& a = j.at("aggregate");
    report.aggregate.accuracy_on_targets = read_optional(a, "accuracy_on_targets");
    report.aggregate.mean_cm = read_optional(a, "mean_cm");
    report.aggregate.dac = read_optional(a, "dac");
    report.aggregate.r_clean = read_optional(a, "r_clean");
    report.aggregate.mean_time_s = read_optional(a, "mean_time_s");
    report.aggregate.mean_peak_edges = read_optional(a, "mean_peak_edges");
    for (const auto& r : j.at("per_target")) {
      TargetOutcome row;
      row.target = r.at("target").get<NodeId>();
      row.label = r.at("label").get<int>();
      row.clean_prediction = r.at("clean_prediction").get<int>();
      row.poisoned_prediction = r.at("poisoned_prediction").get<int>();
      row.clean_cm = r.at("clean_cm").get<double>();
      row.poisoned_cm = r.at("poisoned_cm").get<double>();
      row.success = r.at("success").get<bool>();
      row.perturbation = perturbation_from_json(r.at("perturbation").dump());
      report.per_target.push_back(std::move(row));
    }
    for (const auto& f : j.at("failures")) {
      report.failures.push_back({f.at("target").get<NodeId>(), f.at("message").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
  return report;
}

}  // namespace sga
