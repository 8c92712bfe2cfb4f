#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gnp/tensor_sensing.hpp"

namespace gnp {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "gnp.tensor_sensing_instance";
constexpr int kVersion = 1;

json matrix_to_json(const DenseMatrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

DenseMatrix matrix_from_json(const json& rows, Eigen::Index expect_rows, Eigen::Index expect_cols,
                             const char* name) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows) {
    throw std::runtime_error(std::string("instance file: bad row count for ") + name);
  }
  DenseMatrix a(expect_rows, expect_cols);
  for (Eigen::Index i = 0; i < expect_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols) {
      throw std::runtime_error(std::string("instance file: bad column count for ") + name);
    }
    for (Eigen::Index j = 0; j < expect_cols; ++j) {
      a(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return a;
}

}  // namespace

void save_instance(const TensorSensingInstance& inst, const std::filesystem::path& path,
                   bool include_matrices) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["seed"] = inst.seed;
  doc["params"] = {{"n", inst.params.n},         {"d", inst.params.d},
                   {"r", inst.params.r},         {"m", inst.params.m},
                   {"kappa", inst.params.kappa}, {"pfail", inst.params.pfail}};
  if (include_matrices) {
    json mats;
    mats["x_star"] = matrix_to_json(inst.x_star);
    mats["p"] = matrix_to_json(inst.p);
    mats["q"] = matrix_to_json(inst.q);
    mats["noise"] = std::vector<double>(inst.noise.data(), inst.noise.data() + inst.noise.size());
    mats["b"] = std::vector<double>(inst.b.data(), inst.b.data() + inst.b.size());
    mats["corrupted"] = inst.corrupted;
    doc["matrices"] = std::move(mats);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_instance: cannot open " + path.string());
  out << doc.dump(1) << '\n';
}

TensorSensingInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_instance: cannot open " + path.string());
  const json doc = json::parse(in);
  if (doc.value("format", "") != kFormat) {
    throw std::runtime_error("load_instance: not a tensor sensing instance file");
  }
  TensorSensingParams params;
  const json& p = doc.at("params");
  params.n = p.at("n").get<int>();
  params.d = p.at("d").get<int>();
  params.r = p.at("r").get<int>();
  params.m = p.at("m").get<int>();
  params.kappa = p.at("kappa").get<double>();
  params.pfail = p.at("pfail").get<double>();
  const auto seed = doc.at("seed").get<std::uint64_t>();

  if (!doc.contains("matrices")) return generate_instance(RandomStream(seed), params);

  params.validate();
  const json& mats = doc.at("matrices");
  TensorSensingInstance inst;
  inst.params = params;
  inst.seed = seed;
  inst.x_star = matrix_from_json(mats.at("x_star"), params.d, params.r, "x_star");
  inst.p = matrix_from_json(mats.at("p"), params.m, params.d, "p");
  inst.q = matrix_from_json(mats.at("q"), params.m, params.d, "q");
  const auto noise = mats.at("noise").get<std::vector<double>>();
  const auto b = mats.at("b").get<std::vector<double>>();
  inst.corrupted = mats.at("corrupted").get<std::vector<bool>>();
  if (noise.size() != static_cast<std::size_t>(params.m) ||
      b.size() != static_cast<std::size_t>(params.m) ||
      inst.corrupted.size() != static_cast<std::size_t>(params.m)) {
    throw std::runtime_error("load_instance: measurement vectors have the wrong length");
  }
  inst.noise = Eigen::Map<const Vector>(noise.data(), params.m);
  inst.b = Eigen::Map<const Vector>(b.data(), params.m);
  return inst;
}

}  // namespace gnp
