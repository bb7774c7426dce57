#include "sga/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sga/error.hpp"

namespace sga {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      auto bits = std::bit_cast<std::uint64_t>(m(i, j));
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

Eigen::MatrixXd read_matrix(std::ifstream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::uint64_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw Error("checkpoint payload truncated");
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      m(i, j) = std::bit_cast<double>(bits);
    }
  }
  return m;
}

fs::path payload_path(const fs::path& path) { return fs::path(path.string() + ".bin"); }

}  // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& checkpoint) {
  json header;
  header["seed"] = checkpoint.info.seed;
  header["train_frac"] = checkpoint.info.train_frac;
  header["val_frac"] = checkpoint.info.val_frac;
  header["payload"] = payload_path(path).filename().string();

  std::ofstream bin(payload_path(path), std::ios::binary);
  if (!bin) throw Error("cannot write " + payload_path(path).string());
  if (const auto* sgc = std::get_if<SurrogateModel>(&checkpoint.model)) {
    header["model"] = "sgc";
    header["k"] = sgc->k;
    header["epsilon"] = sgc->epsilon;
    header["num_features"] = sgc->weight.rows();
    header["num_classes"] = sgc->weight.cols();
    header["shapes"] = json::array({json::array({sgc->weight.rows(), sgc->weight.cols()})});
    write_matrix(bin, sgc->weight);
  } else {
    const auto& gcn = std::get<GcnModel>(checkpoint.model);
    header["model"] = "gcn";
    header["hidden"] = gcn.hidden();
    header["num_features"] = gcn.w0.rows();
    header["num_classes"] = gcn.w1.cols();
    header["shapes"] = json::array({json::array({gcn.w0.rows(), gcn.w0.cols()}),
                                    json::array({gcn.w1.rows(), gcn.w1.cols()})});
    write_matrix(bin, gcn.w0);
    write_matrix(bin, gcn.w1);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << header.dump(2) << '\n';
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const json header = json::parse(in, nullptr, false);
  if (header.is_discarded()) throw Error("checkpoint header is not valid JSON: " + path.string());

  std::ifstream bin(path.parent_path() / header.at("payload").get<std::string>(), std::ios::binary);
  if (!bin) throw Error("cannot open checkpoint payload for " + path.string());

  Checkpoint checkpoint;
  checkpoint.info.seed = header.value("seed", std::uint64_t{0});
  checkpoint.info.train_frac = header.value("train_frac", 0.1);
  checkpoint.info.val_frac = header.value("val_frac", 0.1);
  const auto& shapes = header.at("shapes");
  const auto kind = header.at("model").get<std::string>();
  if (kind == "sgc") {
    SurrogateModel m;
    m.k = header.at("k").get<int>();
    m.epsilon = header.value("epsilon", 1.0);
    m.weight = read_matrix(bin, shapes[0][0].get<Eigen::Index>(), shapes[0][1].get<Eigen::Index>());
    checkpoint.model = std::move(m);
  } else if (kind == "gcn") {
    GcnModel m;
    m.w0 = read_matrix(bin, shapes[0][0].get<Eigen::Index>(), shapes[0][1].get<Eigen::Index>());
    m.w1 = read_matrix(bin, shapes[1][0].get<Eigen::Index>(), shapes[1][1].get<Eigen::Index>());
    checkpoint.model = std::move(m);
  } else {
    throw Error("unknown model kind '" + kind + "' in " + path.string());
  }
  return checkpoint;
}

}  // namespace sga
