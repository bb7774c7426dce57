#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "sga/models.hpp"

namespace sga {

struct CheckpointInfo {
  std::uint64_t seed = 0;
  double train_frac = 0.1;
  double val_frac = 0.1;
};

struct Checkpoint {
  std::variant<SurrogateModel, GcnModel> model;
  CheckpointInfo info;
};

// Writes `path` (JSON header) and `path` + ".bin" (little-endian float64
// weights, row-major, in header order).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sga
