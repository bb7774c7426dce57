#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sga/error.hpp"
#include "sga/graph.hpp"

namespace sga {

namespace fs = std::filesystem;

namespace {

std::ifstream open_required(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing bundle file: " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, const fs::path& file, std::size_t line) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(file.filename().string() + ":" + std::to_string(line) + ": cannot parse '" +
                std::string(text) + "'");
  }
  return value;
}

std::vector<std::vector<double>> read_features(const fs::path& path) {
  auto in = open_required(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_number<double>(rest.substr(0, comma), path, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error("features.csv:" + std::to_string(line_no) + ": ragged feature row (" +
                  std::to_string(row.size()) + " values, expected " +
                  std::to_string(rows.front().size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Graph load_graph_bundle(const fs::path& dir, const BundleOptions& options) {
  const auto feature_rows = read_features(dir / "features.csv");

  std::vector<int> labels;
  {
    auto in = open_required(dir / "labels.csv");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      labels.push_back(parse_number<int>(line, dir / "labels.csv", line_no));
    }
  }
  if (labels.size() != feature_rows.size()) {
    throw Error("labels.csv has " + std::to_string(labels.size()) + " rows but features.csv has " +
                std::to_string(feature_rows.size()));
  }
  const auto n = static_cast<NodeId>(labels.size());

  int max_label = -1;
  for (int c : labels) {
    if (c < 0) throw Error("negative label");
    max_label = std::max(max_label, c);
  }
  int num_classes = max_label + 1;
  if (fs::exists(dir / "meta.json")) {
    std::ifstream in(dir / "meta.json");
    const auto meta = nlohmann::json::parse(in, nullptr, false);
    if (meta.is_discarded()) throw Error("meta.json is not valid JSON");
    if (meta.contains("C")) {
      num_classes = meta.at("C").get<int>();
      if (max_label >= num_classes) {
        throw Error("label " + std::to_string(max_label) + " >= C=" + std::to_string(num_classes));
      }
    }
  }

  std::vector<NodePair> edges;
  {
    const auto path = dir / "edges.tsv";
    auto in = open_required(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto text = trim(line);
      if (text.empty()) continue;
      const auto sep = text.find_first_of("\t ");
      if (sep == std::string_view::npos) {
        throw Error("edges.tsv:" + std::to_string(line_no) + ": expected two ids");
      }
      const auto u = parse_number<NodeId>(text.substr(0, sep), path, line_no);
      const auto v = parse_number<NodeId>(text.substr(sep + 1), path, line_no);
      if (u < 0 || v < 0 || u >= n || v >= n) {
        throw Error("edges.tsv:" + std::to_string(line_no) + ": node id out of range");
      }
      if (u == v) throw Error("edges.tsv:" + std::to_string(line_no) + ": self-loop on node " + std::to_string(u));
      edges.emplace_back(u, v);
    }
  }

  const Eigen::Index f = feature_rows.empty() ? 0 : static_cast<Eigen::Index>(feature_rows.front().size());
  FeatureMatrix features(n, f);
  for (NodeId i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < f; ++j) features(i, j) = feature_rows[i][j];
  }
  if (options.row_normalize_features) {
    for (NodeId i = 0; i < n; ++i) {
      const double s = features.row(i).sum();
      if (s != 0.0) features.row(i) /= s;
    }
  }
  return Graph(n, edges, std::move(features), std::move(labels), num_classes);
}

void save_graph_bundle(const Graph& g, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    for (const auto& e : g.edge_list()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    out.precision(17);
    const auto& x = g.features();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (j) out << ',';
        out << x(i, j);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (int c : g.labels()) out << c << '\n';
  }
  {
    std::ofstream out(dir / "meta.json");
    out << nlohmann::json{{"name", name}, {"C", g.num_classes()}}.dump(2) << '\n';
  }
  if (!fs::exists(dir / "labels.csv")) throw Error("failed to write bundle to " + dir.string());
}

}  // namespace sga
