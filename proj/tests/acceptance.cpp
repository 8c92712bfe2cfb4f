// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "gnp/bench/config.hpp"
#include "gnp/bench/runner.hpp"
#include "gnp/cg.hpp"
#include "gnp/diagnostics.hpp"
#include "gnp/solvers.hpp"
#include "tensor_oracle.hpp"

namespace {

using namespace gnp;
using namespace gnp::bench;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int failures = 0;
// Criteria are evaluated in dependency order and printed by number.
std::map<int, std::string> lines;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  lines[id] = std::string(pass ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + what +
              ": " + detail;
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string calls_text(const std::optional<long>& v) {
  return v ? std::to_string(*v) : std::string("not reached");
}

// ---- 1 ----------------------------------------------------------------------

void gram_identity() {
  const auto t0 = Clock::now();
  RandomStream stream(1001);
  double worst = 0.0;
  int pairs = 0;
  int configs = 0;
  for (int n : {2, 3}) {
    for (int d : {3, 4, 5}) {
      for (int r : {1, 2, 3}) {
        if (std::pow(d, n) > 1e5) continue;
        ++configs;
        for (int k = 0; k < 50; ++k) {
          const DenseMatrix x = gaussian_matrix(stream, d, r);
          const DenseMatrix z = gaussian_matrix(stream, d, r);
          const DenseMatrix jac = testing::jacobian(x, n);
          const DenseMatrix expected =
              testing::unflatten(jac.transpose() * (jac * testing::flatten(z)), d, r);
          worst = std::max(worst, testing::rel_diff(gram_apply(x, z, n), expected));
          ++pairs;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst <= 1e-8 && secs < 10.0, "Gram identity vs explicit Jacobian",
         "max rel err " + sci(worst) + " over " + std::to_string(pairs) + " pairs in " +
             std::to_string(configs) + " (n,d,r) classes, " + fixed(secs) + " s");
}

// ---- 2 ----------------------------------------------------------------------

void pullback_finite_differences() {
  const auto t0 = Clock::now();
  struct Class {
    int n, d, r, m;
    double kappa, pfail;
  };
  const Class classes[] = {{2, 10, 2, 160, 2.0, 0.0}, {2, 10, 2, 160, 2.0, 0.2},
                           {3, 6, 2, 288, 2.0, 0.0},  {3, 6, 2, 288, 2.0, 0.2},
                           {4, 5, 2, 320, 2.0, 0.0},  {4, 5, 2, 320, 2.0, 0.2}};
  double worst = 0.0;
  int points = 0;
  int missing = 0;
  std::uint64_t seed = 2001;
  for (const Class& c : classes) {
    const auto inst = testing::small_instance(seed++, c.n, c.d, c.r, c.m, c.kappa, c.pfail);
    RandomStream stream(seed++);
    for (int i = 0; i < 20; ++i) {
      const FdReport fd =
          fd_pullback_check_sampled(inst, stream, 0.5 * inst.x_star.norm(), 1e-6);
      if (fd.kink) {
        ++missing;
        continue;
      }
      worst = std::max(worst, fd.rel_error);
      ++points;
    }
  }
  const double secs = seconds_since(t0);
  report(2, missing == 0 && worst <= 1e-4 && secs < 10.0, "pullback vs central differences",
         "max rel err " + sci(worst) + " at " + std::to_string(points) +
             " smooth points (20 per class, 6 classes, " + std::to_string(missing) +
             " without a smooth draw), " + fixed(secs) + " s");
}

// ---- 4 ----------------------------------------------------------------------

void min_norm_cg() {
  RandomStream stream(4001);
  double worst_err = 0.0;
  double worst_kernel = 0.0;
  int systems = 0;
  int unconverged = 0;
  auto check = [&](const DenseMatrix& a) {
    const Eigen::Index n = a.rows();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(a);
    const double cut = 1e-10 * eig.eigenvalues().cwiseAbs().maxCoeff();
    Vector inv = eig.eigenvalues();
    std::vector<Eigen::Index> kernel;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (inv(i) > cut) {
        inv(i) = 1.0 / inv(i);
      } else {
        inv(i) = 0.0;
        kernel.push_back(i);
      }
    }
    const DenseMatrix pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    const DenseMatrix g = a * gaussian_matrix(stream, n, 1);
    const SelfAdjointAction action{n, 1, [&a](const DenseMatrix& z) { return DenseMatrix(a * z); }};
    const CgResult cg = cg_min_norm(action, g, {1e-12, 0});
    if (!cg.converged) ++unconverged;
    const DenseMatrix expected = pinv * g;
    worst_err = std::max(worst_err, (cg.solution - expected).norm() / expected.norm());
    double kernel_norm = 0.0;
    for (Eigen::Index i : kernel) {
      kernel_norm += std::pow(eig.eigenvectors().col(i).dot(cg.solution.col(0)), 2);
    }
    worst_kernel = std::max(worst_kernel, std::sqrt(kernel_norm) / cg.solution.norm());
    ++systems;
  };
  // Ten random rank-deficient PSD matrices.
  for (int i = 0; i < 10; ++i) {
    const Eigen::Index n = 20 + 18 * i;
    const DenseMatrix f = gaussian_matrix(stream, n, n / 2 + i);
    check(f * f.transpose());
  }
  // Ten densified Gram operators of the quadratic map (always singular).
  const int shapes[][2] = {{4, 2}, {6, 2}, {8, 3}, {10, 3}, {12, 4},
                           {15, 4}, {20, 5}, {25, 6}, {30, 5}, {40, 5}};
  for (const auto& shape : shapes) {
    const int d = shape[0];
    const int r = shape[1];
    const DenseMatrix x = gaussian_matrix(stream, d, r);
    const SelfAdjointAction gram = gram_action(x, 2);
    DenseMatrix dense(d * r, d * r);
    DenseMatrix unit = DenseMatrix::Zero(d, r);
    for (int k = 0; k < d * r; ++k) {
      unit(k) = 1.0;
      const DenseMatrix col = gram(unit);
      dense.col(k) = Eigen::Map<const Vector>(col.data(), d * r);
      unit(k) = 0.0;
    }
    check(0.5 * (dense + dense.transpose()));
  }
  report(4, worst_err <= 1e-8 && worst_kernel <= 1e-6 && unconverged == 0,
         "min-norm CG on singular PSD systems",
         std::to_string(systems) + " systems (<= 200 unknowns): max rel err " + sci(worst_err) +
             ", max kernel component " + sci(worst_kernel) + ", unconverged " +
             std::to_string(unconverged));
}

// ---- 3, 5, 6 ----------------------------------------------------------------

void desk_figures() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = parse_config({{"preset", "fig1-desk"}, {"methods", {"gnp", "polyak", "scaledsm"}}});
  std::map<std::pair<std::string, double>, RunArtifact> runs;
  for (const CellSpec& cell : cfg.cells()) {
    RunArtifact a = run_cell(cell, std::nullopt, false);
    runs.emplace(std::make_pair(method_name(cell.method), cell.kappa), std::move(a));
  }
  const double secs = seconds_since(t0);
  auto calls = [&](const std::string& method, double kappa) {
    return runs.at({method, kappa}).trace.calls_to_gap(1e-8);
  };

  // 3: projected-norm identity on every logged GNP step.
  double worst_identity = 0.0;
  int steps = 0;
  bool all_ok = true;
  for (double kappa : {1.0, 10.0}) {
    const RunArtifact& a = runs.at({"gnp", kappa});
    all_ok = all_ok && a.ok();
    for (const TraceRow& row : a.trace.rows) {
      if (!std::isfinite(row.proj_identity_err)) continue;
      worst_identity = std::max(worst_identity, row.proj_identity_err);
      ++steps;
    }
  }
  report(3, all_ok && steps > 0 && worst_identity <= 1e-6, "projected-norm identity on GNP steps",
         "max |<g,D> - <gram(D),D>| / <g,D> = " + sci(worst_identity) + " over " +
             std::to_string(steps) + " steps (fig1-desk, kappa 1 and 10)");

  // 5: condition-number trend.
  const auto g1 = calls("gnp", 1.0);
  const auto g10 = calls("gnp", 10.0);
  const auto p1 = calls("polyak", 1.0);
  const auto p10 = calls("polyak", 10.0);
  const long budget = cfg.max_oracle_calls;
  bool pass5 = g1 && g10 && *g1 <= 300 && *g10 <= 300;
  double gnp_ratio = NAN;
  if (pass5) {
    gnp_ratio = static_cast<double>(std::max(*g1, *g10)) / static_cast<double>(std::min(*g1, *g10));
    pass5 = gnp_ratio <= 1.5;
  }
  double polyak_ratio = NAN;
  if (p1) {
    polyak_ratio = static_cast<double>(p10.value_or(budget)) / static_cast<double>(*p1);
    pass5 = pass5 && polyak_ratio >= 3.0;
  } else {
    pass5 = false;
  }
  pass5 = pass5 && secs < 60.0;
  report(5, pass5, "fig1-desk condition-number trend",
         "GNP calls to 1e-8: " + calls_text(g1) + " (kappa 1), " + calls_text(g10) +
             " (kappa 10), ratio " + fixed(gnp_ratio) + "; Polyak: " + calls_text(p1) + " vs " +
             calls_text(p10) + ", ratio " + fixed(polyak_ratio, 1) + "; " + fixed(secs, 1) +
             " s for all six runs");

  // 6: scaled subgradient versus GNP.
  const auto s10 = calls("scaledsm", 10.0);
  bool pass6 = s10 && g10;
  double ratio6 = NAN;
  if (pass6) {
    ratio6 = static_cast<double>(std::max(*s10, *g10)) / static_cast<double>(std::min(*s10, *g10));
    pass6 = ratio6 <= 2.0;
  }
  report(6, pass6, "fig2-desk ScaledSM vs GNP at kappa 10",
         "calls to 1e-8: ScaledSM " + calls_text(s10) + ", GNP " + calls_text(g10) + ", ratio " +
             fixed(ratio6));
}

// ---- 7 ----------------------------------------------------------------------

void restart_mechanism() {
  const auto t0 = Clock::now();
  const double eps = 1e-6;
  const double h0 = -1.0;
  CellSpec cell;
  cell.method = Method::kRgnp;
  cell.n = 2;
  cell.d = 50;
  cell.r = 5;
  cell.m = 8 * 50 * 5;
  cell.kappa = 5.0;
  cell.pfail = 0.0;
  cell.seed = 7001;
  cell.T = 200;
  cell.h0 = h0;
  const double h_star = 0.0;
  cell.K = 1 + static_cast<int>(std::ceil(std::log2((h_star - h0) / eps))) + 2;
  cell.max_oracle_calls = static_cast<long>(cell.K) * (cell.T + 1);
  const RunArtifact a = run_cell(cell, std::nullopt, false);

  bool halving = a.ok() && static_cast<int>(a.lower_bounds.size()) == cell.K + 1;
  int rounds_checked = 0;
  for (std::size_t k = 0; halving && k + 1 < a.lower_bounds.size(); ++k) {
    const double gap = h_star - a.lower_bounds[k];
    if (gap < 0.0) continue;
    ++rounds_checked;
    halving = h_star - a.lower_bounds[k + 1] <= 0.5 * gap + 1e-15;
  }
  // Objective at y_K: the best iterate of the last round.
  double final_h = INFINITY;
  for (const TraceRow& row : a.trace.rows) {
    if (row.restart_k == cell.K - 1) final_h = std::min(final_h, row.h_value);
  }
  const double final_gap = final_h - h_star;
  const double secs = seconds_since(t0);
  report(7, halving && final_gap <= eps && secs < 60.0, "restart lower-bound halving",
         "K = " + std::to_string(cell.K) + ", T = 200, theta = 1/2, h0 = -1: gap halved in " +
             std::to_string(rounds_checked) + " rounds with h_k <= h*, final objective gap " +
             sci(final_gap) + ", " + fixed(secs, 1) + " s");
}

// ---- 8 ----------------------------------------------------------------------

void outlier_restarts() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = parse_config({{"preset", "fig4-desk"}, {"methods", "rgnp"}});
  bool pass = true;
  std::string detail;
  for (const CellSpec& cell : cfg.cells()) {
    const RunArtifact a = run_cell(cell, std::nullopt, false);
    const auto calls = a.trace.calls_to_gap(1e-6);
    pass = pass && a.ok() && calls && *calls <= 10000;
    if (!detail.empty()) detail += "; ";
    detail += "pfail " + fixed(cell.pfail, 1) + ": " + calls_text(calls) + " calls";
  }
  const double secs = seconds_since(t0);
  report(8, pass, "RGNP reaches ||noise||_1 + 1e-6 under outliers",
         detail + " (limit 10000), " + fixed(secs, 1) + " s");
}

// ---- 9 ----------------------------------------------------------------------

void constant_rank() {
  bool pass = true;
  std::string detail;
  for (int d : {4, 6}) {
    const auto inst = testing::small_instance(9000 + d, 2, d, 2, 8 * d * 2, 2.0);
    RandomStream stream(9100 + d);
    std::set<int> gram_ranks;
    std::set<int> svd_ranks;
    RankReport last;
    for (int i = 0; i < 10; ++i) {
      const DenseMatrix x = uniform_in_ball(stream, inst.x_star, 0.1 * inst.x_star.norm());
      last = rank_report(x, 2, 1e-8);
      gram_ranks.insert(last.rank);
      const Vector sv = singular_values(testing::jacobian(x, 2));
      int rank = 0;
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > 1e-6 * sv(0)) ++rank;
      }
      svd_ranks.insert(rank);
    }
    const bool constant = gram_ranks.size() == 1 && svd_ranks == gram_ranks;
    pass = pass && constant;
    if (!detail.empty()) detail += "; ";
    detail += "d=" + std::to_string(d) + ": measured " +
              (constant ? std::to_string(*gram_ranks.begin()) : std::string("varies")) +
              " at 10 points, r(r+1)/2 = " + std::to_string(last.formula_half_r_r_plus_1) +
              ", dr - r(r-1)/2 = " + std::to_string(last.formula_dr_minus_skew);
  }
  report(9, pass, "constant rank near a full-rank solution (n=2, r=2)", detail);
}

// ---- 10 ---------------------------------------------------------------------

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    out[entry.path().filename().string()] = os.str();
  }
  return out;
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "gnp_acceptance_determinism";
  fs::remove_all(root);
  nlohmann::json doc = {{"methods", {"gnp", "rgnp", "polyak", "rpolyak", "scaledsm"}},
                        {"n", 2},
                        {"d", 20},
                        {"r", 3},
                        {"kappa", {1, 5}},
                        {"pfail", {0.0, 0.1}},
                        {"seed", 10001},
                        {"T", 100},
                        {"K", 3},
                        {"h0", 0.0},
                        {"max_oracle_calls", 400}};
  doc["output_dir"] = (root / "a").string();
  run_experiment(parse_config(doc), false, thread_cap());
  doc["output_dir"] = (root / "b").string();
  run_experiment(parse_config(doc), false, thread_cap());
  const auto a = csv_files(root / "a");
  const auto b = csv_files(root / "b");
  int compared = 0;
  int differing = 0;
  for (const auto& [name, content] : a) {
    ++compared;
    const auto it = b.find(name);
    if (it == b.end() || it->second != content) ++differing;
  }
  fs::remove_all(root);
  report(10, compared == 21 && b.size() == a.size() && differing == 0, "byte-identical reruns",
         std::to_string(compared) + " CSVs (20 traces plus summary) compared across two runs, " +
             std::to_string(differing) + " differ");
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  gram_identity();
  pullback_finite_differences();
  min_norm_cg();
  desk_figures();
  restart_mechanism();
  outlier_restarts();
  constant_rank();
  determinism();
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d failing criteria, %.1f s total\n", failures == 0 ? "ALL PASS" : "FAILURES",
              failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
