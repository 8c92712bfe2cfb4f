#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnp/diagnostics.hpp"

namespace gnp::bench {

// Raised for malformed or inconsistent experiment configurations (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { kGnp, kRgnp, kPolyak, kRpolyak, kScaledSm };

std::string method_name(Method m);
Method parse_method(const std::string& name);
bool is_restarted(Method m);

// Per-method knobs; unset fields fall back to the experiment-wide values.
struct MethodOverrides {
  std::optional<int> T;
  std::optional<int> K;
  std::optional<double> theta;
  std::optional<double> h0;
  std::optional<long> max_oracle_calls;
  std::optional<double> time_budget_sec;
};

// One fully resolved run: a single method on a single instance.
struct CellSpec {
  Method method = Method::kGnp;
  int n = 2;
  int d = 0;
  int r = 0;
  int m = 0;
  double kappa = 1.0;
  double pfail = 0.0;
  std::uint64_t seed = 0;
  int T = 0;
  int K = 1;
  double theta = 1.0;
  std::optional<double> h0;
  long max_oracle_calls = 0;
  std::optional<double> time_budget_sec;
  std::optional<double> target_gap;
  double init_radius = 0.1;
  double cg_tol = 1e-10;

  TensorSensingParams params() const { return {n, d, r, m, kappa, pfail}; }
  // Stable file stem, e.g. "gnp_n2_d100_r5_m4000_k10_p0_s1".
  std::string label() const;
};

struct PlotSpec {
  std::string x = "oracle_calls";  // oracle_calls | time
  std::string y = "obj_gap";       // obj_gap | image_dist
};

struct CheckSpec {
  int fd_points = 20;
  double fd_step = 1e-6;
  double fd_radius = 0.5;  // fraction of ||X*||_F
  double fd_tol = 1e-4;
  int rank_points = 10;
  double rank_radius = 0.1;
  double rank_tol = 1e-8;
  int sharpness_samples = 50;
  double sharpness_radius = 0.1;
  int gnp_T = 100;
  double rate_eps = 1e-8;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::vector<Method> methods;
  std::vector<int> n_values;
  std::vector<int> d_values;
  std::vector<int> r_values;
  std::optional<int> m;  // explicit measurement count; otherwise the multiplier rule
  int m_multiplier = 8;
  std::vector<double> kappas{1.0};
  std::vector<double> pfails{0.0};
  std::uint64_t seed = 1;
  int T = 500;
  int K = 1;
  double theta = 1.0;
  std::optional<double> h0;
  long max_oracle_calls = 5000;
  std::optional<double> time_budget_sec;
  std::optional<double> target_gap;
  double init_radius = 0.1;
  double cg_tol = 1e-10;
  bool record_wall_time = false;
  std::filesystem::path output_dir = "out";
  std::map<Method, MethodOverrides> overrides;
  std::vector<PlotSpec> plots{PlotSpec{}};
  CheckSpec check;
  // Theory inputs that have no estimator; recorded as assumed in reports.
  ConstantInputs constants{0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0};

  // m = mult * d * r for n = 2 and mult * n * d * r for n >= 3, unless m is set.
  int measurements(int n, int d, int r) const;
  // Cartesian product kappa x pfail x n x d x r x method, in that nesting order.
  std::vector<CellSpec> cells() const;
  void validate() const;
};

std::vector<std::string> preset_names();
nlohmann::json preset(const std::string& name);

// Applies the "preset" key (if any) as a base and merge-patches the rest over it.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gnp::bench
