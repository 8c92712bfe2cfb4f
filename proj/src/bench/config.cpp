#include "gnp/bench/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gnp::bench {
namespace {

using nlohmann::json;

const std::map<std::string, Method>& method_table() {
  static const std::map<std::string, Method> table{{"gnp", Method::kGnp},
                                                   {"rgnp", Method::kRgnp},
                                                   {"polyak", Method::kPolyak},
                                                   {"rpolyak", Method::kRpolyak},
                                                   {"scaledsm", Method::kScaledSm}};
  return table;
}

// Numbers in labels: six significant digits with '.' replaced so the label
// stays a clean file stem.
std::string label_number(double v) {
  std::ostringstream os;
  os << v;
  std::string s = os.str();
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

template <typename T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field '" + key + "' has the wrong type");
  }
}

// Accepts a scalar or an array of scalars.
template <typename T>
std::vector<T> get_list(const json& value, const std::string& key) {
  std::vector<T> out;
  if (value.is_array()) {
    for (const json& item : value) out.push_back(get_as<T>(item, key));
  } else {
    out.push_back(get_as<T>(value, key));
  }
  if (out.empty()) throw ConfigError("config: field '" + key + "' must not be empty");
  return out;
}

std::optional<double> get_optional_double(const json& value, const std::string& key) {
  if (value.is_null()) return std::nullopt;
  return get_as<double>(value, key);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) {
      throw ConfigError("config: unknown field '" + item.key() + "' in " + where);
    }
  }
}

MethodOverrides parse_overrides(const json& obj, const std::string& method) {
  if (!obj.is_object()) throw ConfigError("config: method_overrides." + method + " must be an object");
  reject_unknown(obj, {"T", "K", "theta", "h0", "max_oracle_calls", "time_budget_sec"},
                 "method_overrides." + method);
  MethodOverrides o;
  if (obj.contains("T")) o.T = get_as<int>(obj["T"], "T");
  if (obj.contains("K")) o.K = get_as<int>(obj["K"], "K");
  if (obj.contains("theta")) o.theta = get_as<double>(obj["theta"], "theta");
  if (obj.contains("h0")) o.h0 = get_optional_double(obj["h0"], "h0");
  if (obj.contains("max_oracle_calls")) {
    o.max_oracle_calls = get_as<long>(obj["max_oracle_calls"], "max_oracle_calls");
  }
  if (obj.contains("time_budget_sec")) {
    o.time_budget_sec = get_optional_double(obj["time_budget_sec"], "time_budget_sec");
  }
  return o;
}

CheckSpec parse_check(const json& obj) {
  if (!obj.is_object()) throw ConfigError("config: 'check' must be an object");
  reject_unknown(obj,
                 {"fd_points", "fd_step", "fd_radius", "fd_tol", "rank_points", "rank_radius",
                  "rank_tol", "sharpness_samples", "sharpness_radius", "gnp_T", "rate_eps"},
                 "check");
  CheckSpec c;
  auto read = [&](const char* key, auto& field) {
    if (obj.contains(key)) field = get_as<std::decay_t<decltype(field)>>(obj[key], key);
  };
  read("fd_points", c.fd_points);
  read("fd_step", c.fd_step);
  read("fd_radius", c.fd_radius);
  read("fd_tol", c.fd_tol);
  read("rank_points", c.rank_points);
  read("rank_radius", c.rank_radius);
  read("rank_tol", c.rank_tol);
  read("sharpness_samples", c.sharpness_samples);
  read("sharpness_radius", c.sharpness_radius);
  read("gnp_T", c.gnp_T);
  read("rate_eps", c.rate_eps);
  return c;
}

ConstantInputs parse_constants(const json& obj, ConstantInputs base) {
  if (!obj.is_object()) throw ConfigError("config: 'constants' must be an object");
  reject_unknown(obj, {"mu_c", "lipschitz_grad_c", "lipschitz_c", "curvature_c", "radius"},
                 "constants");
  auto read = [&](const char* key, double& field) {
    if (obj.contains(key)) field = get_as<double>(obj[key], key);
  };
  read("mu_c", base.mu_c);
  read("lipschitz_grad_c", base.lipschitz_grad_c);
  read("lipschitz_c", base.lipschitz_c);
  read("curvature_c", base.curvature_c);
  read("radius", base.radius);
  return base;
}

}  // namespace

std::string method_name(Method m) {
  for (const auto& [name, value] : method_table()) {
    if (value == m) return name;
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  const auto it = method_table().find(name);
  if (it == method_table().end()) throw ConfigError("config: unknown method '" + name + "'");
  return it->second;
}

bool is_restarted(Method m) { return m == Method::kRgnp || m == Method::kRpolyak; }

std::string CellSpec::label() const {
  return method_name(method) + "_n" + std::to_string(n) + "_d" + std::to_string(d) + "_r" +
         std::to_string(r) + "_m" + std::to_string(m) + "_k" + label_number(kappa) + "_p" +
         label_number(pfail) + "_s" + std::to_string(seed);
}

int ExperimentConfig::measurements(int n, int d, int r) const {
  if (m) return *m;
  return n == 2 ? m_multiplier * d * r : m_multiplier * n * d * r;
}

std::vector<CellSpec> ExperimentConfig::cells() const {
  std::vector<CellSpec> out;
  for (double kappa : kappas) {
    for (double pfail : pfails) {
      for (int n : n_values) {
        for (int d : d_values) {
          for (int r : r_values) {
            for (Method method : methods) {
              CellSpec cell;
              cell.method = method;
              cell.n = n;
              cell.d = d;
              cell.r = r;
              cell.m = measurements(n, d, r);
              // A rank-one factor is always perfectly conditioned.
              cell.kappa = r == 1 ? 1.0 : kappa;
              cell.pfail = pfail;
              cell.seed = seed;
              cell.T = T;
              cell.K = K;
              cell.theta = theta;
              cell.h0 = h0;
              cell.max_oracle_calls = max_oracle_calls;
              cell.time_budget_sec = time_budget_sec;
              cell.target_gap = target_gap;
              cell.init_radius = init_radius;
              cell.cg_tol = cg_tol;
              if (auto it = overrides.find(method); it != overrides.end()) {
                const MethodOverrides& o = it->second;
                if (o.T) cell.T = *o.T;
                if (o.K) cell.K = *o.K;
                if (o.theta) cell.theta = *o.theta;
                if (o.h0) cell.h0 = o.h0;
                if (o.max_oracle_calls) cell.max_oracle_calls = *o.max_oracle_calls;
                if (o.time_budget_sec) cell.time_budget_sec = o.time_budget_sec;
              }
              out.push_back(cell);
            }
          }
        }
      }
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("config: no methods given");
  if (n_values.empty() || d_values.empty() || r_values.empty()) {
    throw ConfigError("config: n, d and r are required");
  }
  if (kappas.empty() || pfails.empty()) throw ConfigError("config: empty kappa or pfail grid");
  if (m_multiplier < 1) throw ConfigError("config: m_multiplier must be >= 1");
  if (init_radius <= 0.0) throw ConfigError("config: init_radius must be positive");
  if (T < 0 || K < 1) throw ConfigError("config: need T >= 0 and K >= 1");
  if (max_oracle_calls < 1) throw ConfigError("config: max_oracle_calls must be >= 1");
  for (const PlotSpec& p : plots) {
    if (p.x != "oracle_calls" && p.x != "time") throw ConfigError("config: plot x must be oracle_calls or time");
    if (p.y != "obj_gap" && p.y != "image_dist") throw ConfigError("config: plot y must be obj_gap or image_dist");
  }
  for (const CellSpec& cell : cells()) {
    try {
      cell.params().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    if (cell.method == Method::kScaledSm && cell.n != 2) {
      throw ConfigError("config: scaledsm requires n = 2");
    }
    if (is_restarted(cell.method) && !cell.h0) {
      throw ConfigError("config: " + method_name(cell.method) + " requires h0");
    }
    if (!(cell.theta >= 0.5 && cell.theta <= 1.0)) {
      throw ConfigError("config: theta must lie in [1/2, 1]");
    }
    if (cell.T < 0 || cell.K < 1 || cell.max_oracle_calls < 1) {
      throw ConfigError("config: bad T, K or max_oracle_calls for " + method_name(cell.method));
    }
    if (cell.time_budget_sec && !(*cell.time_budget_sec > 0.0)) {
      throw ConfigError("config: time_budget_sec must be positive");
    }
  }
}

std::vector<std::string> preset_names() {
  return {"fig1-desk", "fig2-desk", "fig3-desk", "fig4-desk", "fig5-desk"};
}

json preset(const std::string& name) {
  if (name == "fig1-desk") {
    // Condition-number sweep, matrix sensing.
    return {{"name", name},          {"methods", {"gnp", "polyak"}},
            {"n", 2},                {"d", 100},
            {"r", 5},                {"kappa", {1, 10}},
            {"pfail", 0.0},          {"seed", 1},
            {"T", 5000},             {"max_oracle_calls", 5000},
            {"target_gap", 1e-9},    {"output_dir", "out/fig1-desk"}};
  }
  if (name == "fig2-desk") {
    // Gauss-Newton versus the scaled subgradient preconditioner.
    return {{"name", name},          {"methods", {"gnp", "scaledsm"}},
            {"n", 2},                {"d", 100},
            {"r", 5},                {"kappa", {1, 10}},
            {"pfail", 0.0},          {"seed", 1},
            {"T", 5000},             {"max_oracle_calls", 5000},
            {"target_gap", 1e-9},    {"output_dir", "out/fig2-desk"}};
  }
  if (name == "fig3-desk") {
    // Tensor order sweep with both budget types exposed. Quartic objectives
    // bottom out near 1e-9 in double precision, hence the looser target.
    return {{"name", name},           {"methods", {"gnp", "polyak"}},
            {"n", {2, 3, 4}},         {"d", 50},
            {"r", 3},                 {"kappa", 3},
            {"pfail", 0.0},           {"seed", 1},
            {"T", 5000},              {"max_oracle_calls", 5000},
            {"time_budget_sec", 100}, {"target_gap", 1e-8},
            {"output_dir", "out/fig3-desk"}};
  }
  if (name == "fig4-desk") {
    // Unknown optimal value under outliers: restart schemes from h0 = 0.
    return {{"name", name},
            {"methods", {"rgnp", "rpolyak"}},
            {"n", 2},
            {"d", 50},
            {"r", 5},
            {"kappa", 5},
            {"pfail", {0.1, 0.2}},
            {"seed", 1},
            {"T", 200},
            {"K", 50},
            {"h0", 0.0},
            {"max_oracle_calls", 10000},
            {"output_dir", "out/fig4-desk"}};
  }
  if (name == "fig5-desk") {
    // Rank sweep for third-order tensors.
    return {{"name", name},          {"methods", {"gnp", "polyak"}},
            {"n", 3},                {"d", 50},
            {"r", {2, 5, 8}},        {"kappa", 3},
            {"pfail", 0.0},          {"seed", 1},
            {"T", 5000},             {"max_oracle_calls", 5000},
            {"target_gap", 1e-9},    {"output_dir", "out/fig5-desk"}};
  }
  throw ConfigError("config: unknown preset '" + name + "'");
}

ExperimentConfig parse_config(const json& input) {
  if (!input.is_object()) throw ConfigError("config: top level must be a JSON object");
  json doc = json::object();
  if (input.contains("preset")) doc = preset(get_as<std::string>(input["preset"], "preset"));
  json patch = input;
  patch.erase("preset");
  doc.merge_patch(patch);

  reject_unknown(doc,
                 {"name", "methods", "n", "d", "r", "m", "m_multiplier", "kappa", "pfail", "seed",
                  "T", "K", "theta", "h0", "max_oracle_calls", "time_budget_sec", "target_gap",
                  "init_radius", "cg_tol", "record_wall_time", "output_dir", "method_overrides",
                  "plots", "check", "constants"},
                 "config");

  ExperimentConfig cfg;
  if (doc.contains("name")) cfg.name = get_as<std::string>(doc["name"], "name");
  if (!doc.contains("methods")) throw ConfigError("config: 'methods' is required");
  for (const auto& m : get_list<std::string>(doc["methods"], "methods")) {
    cfg.methods.push_back(parse_method(m));
  }
  for (const char* key : {"n", "d", "r"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("config: '") + key + "' is required");
  }
  cfg.n_values = get_list<int>(doc["n"], "n");
  cfg.d_values = get_list<int>(doc["d"], "d");
  cfg.r_values = get_list<int>(doc["r"], "r");
  if (doc.contains("m") && !doc["m"].is_null()) cfg.m = get_as<int>(doc["m"], "m");
  if (doc.contains("m_multiplier")) cfg.m_multiplier = get_as<int>(doc["m_multiplier"], "m_multiplier");
  if (doc.contains("kappa")) cfg.kappas = get_list<double>(doc["kappa"], "kappa");
  if (doc.contains("pfail")) cfg.pfails = get_list<double>(doc["pfail"], "pfail");
  if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("T")) cfg.T = get_as<int>(doc["T"], "T");
  if (doc.contains("K")) cfg.K = get_as<int>(doc["K"], "K");
  if (doc.contains("theta")) cfg.theta = get_as<double>(doc["theta"], "theta");
  if (doc.contains("h0")) cfg.h0 = get_optional_double(doc["h0"], "h0");
  if (doc.contains("max_oracle_calls")) {
    cfg.max_oracle_calls = get_as<long>(doc["max_oracle_calls"], "max_oracle_calls");
  }
  if (doc.contains("time_budget_sec")) {
    cfg.time_budget_sec = get_optional_double(doc["time_budget_sec"], "time_budget_sec");
  }
  if (doc.contains("target_gap")) cfg.target_gap = get_optional_double(doc["target_gap"], "target_gap");
  if (doc.contains("init_radius")) cfg.init_radius = get_as<double>(doc["init_radius"], "init_radius");
  if (doc.contains("cg_tol")) cfg.cg_tol = get_as<double>(doc["cg_tol"], "cg_tol");
  if (doc.contains("record_wall_time")) {
    cfg.record_wall_time = get_as<bool>(doc["record_wall_time"], "record_wall_time");
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = get_as<std::string>(doc["output_dir"], "output_dir");
  }
  if (doc.contains("method_overrides")) {
    const json& all = doc["method_overrides"];
    if (!all.is_object()) throw ConfigError("config: 'method_overrides' must be an object");
    for (const auto& item : all.items()) {
      cfg.overrides[parse_method(item.key())] = parse_overrides(item.value(), item.key());
    }
  }
  if (doc.contains("plots")) {
    cfg.plots.clear();
    const json& plots = doc["plots"];
    if (!plots.is_array()) throw ConfigError("config: 'plots' must be an array");
    for (const json& p : plots) {
      if (!p.is_object()) throw ConfigError("config: each plot must be an object");
      reject_unknown(p, {"x", "y"}, "plots");
      PlotSpec spec;
      if (p.contains("x")) spec.x = get_as<std::string>(p["x"], "x");
      if (p.contains("y")) spec.y = get_as<std::string>(p["y"], "y");
      cfg.plots.push_back(spec);
    }
  }
  if (doc.contains("check")) cfg.check = parse_check(doc["check"]);
  if (doc.contains("constants")) cfg.constants = parse_constants(doc["constants"], cfg.constants);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace gnp::bench
