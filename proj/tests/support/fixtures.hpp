#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "sga/graph.hpp"

namespace fixture {

// Graph from an explicit edge list; features are one-hot node ids modulo
// `features`, labels alternate over `classes`.
inline sga::Graph make(int n, std::initializer_list<std::pair<int, int>> edges, int features = 2,
                       int classes = 2) {
  std::vector<sga::NodePair> list;
  for (auto [u, v] : edges) list.emplace_back(u, v);
  sga::FeatureMatrix x = sga::FeatureMatrix::Zero(n, features);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    x(i, i % features) = 1.0;
    labels[i] = i % classes;
  }
  return sga::Graph(n, list, std::move(x), std::move(labels), classes);
}

inline sga::Graph path(int n) {
  std::vector<sga::NodePair> list;
  for (int i = 0; i + 1 < n; ++i) list.emplace_back(i, i + 1);
  sga::FeatureMatrix x = sga::FeatureMatrix::Ones(n, 1);
  return sga::Graph(n, list, std::move(x), std::vector<int>(n, 0), 1);
}

inline sga::Graph star(int leaves) {
  std::vector<sga::NodePair> list;
  for (int i = 1; i <= leaves; ++i) list.emplace_back(0, i);
  sga::FeatureMatrix x = sga::FeatureMatrix::Ones(leaves + 1, 1);
  return sga::Graph(leaves + 1, list, std::move(x), std::vector<int>(leaves + 1, 0), 1);
}

inline sga::Graph cycle(int n) {
  std::vector<sga::NodePair> list;
  for (int i = 0; i < n; ++i) list.emplace_back(i, (i + 1) % n);
  sga::FeatureMatrix x = sga::FeatureMatrix::Ones(n, 1);
  return sga::Graph(n, list, std::move(x), std::vector<int>(n, 0), 1);
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sga_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace fixture
