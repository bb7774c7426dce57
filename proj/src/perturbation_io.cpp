#include <fstream>

#include <json.hpp>

#include "sga/attacks.hpp"
#include "sga/error.hpp"

namespace sga {

std::string to_json_line(const Perturbation& p) {
  nlohmann::ordered_json j;
  j["target"] = p.target;
  auto& flips = j["flips"] = nlohmann::ordered_json::array();
  for (const auto& f : p.flips) {
    flips.push_back({f.u, f.v, f.action == FlipAction::kAdd ? "add" : "remove"});
  }
  j["strategy"] = to_string(p.strategy);
  j["elapsed_s"] = p.elapsed_s;
  j["peak_subgraph_edges"] = p.peak_subgraph_edges;
  j["budget"] = p.budget;
  j["partial"] = p.partial;
  return j.dump();
}

Perturbation perturbation_from_json(const std::string& line) {
  Perturbation p;
  try {
    const auto j = nlohmann::json::parse(line);
    p.target = j.at("target").get<NodeId>();
    for (const auto& f : j.at("flips")) {
      if (!f.is_array() || f.size() != 3) throw Error("malformed flip entry");
      const std::string action = f[2].get<std::string>();
      if (action != "add" && action != "remove") throw Error("unknown flip action '" + action + "'");
      p.flips.push_back({f[0].get<NodeId>(), f[1].get<NodeId>(),
                         action == "add" ? FlipAction::kAdd : FlipAction::kRemove});
    }
    p.strategy = parse_strategy(j.at("strategy").get<std::string>());
    p.elapsed_s = j.value("elapsed_s", 0.0);
    p.peak_subgraph_edges = j.value("peak_subgraph_edges", std::size_t{0});
    p.budget = j.value("budget", static_cast<int>(p.flips.size()));
    p.partial = j.value("partial", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed perturbation record: ") + e.what());
  }
  return p;
}

void write_perturbations(const std::filesystem::path& path, const std::vector<Perturbation>& items) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& p : items) out << to_json_line(p) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<Perturbation> read_perturbations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Perturbation> items;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    items.push_back(perturbation_from_json(line));
  }
  return items;
}

}  // namespace sga
