#include "gnp/bench/runner.hpp"

#include <atomic>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "gnp/diagnostics.hpp"
#include "gnp/solvers.hpp"

namespace gnp::bench {
namespace {

using nlohmann::json;

SolverConfig solver_config(const CellSpec& cell) {
  SolverConfig sc;
  sc.max_oracle_calls = cell.max_oracle_calls;
  if (cell.time_budget_sec) sc.time_budget = *cell.time_budget_sec;
  sc.cg_tol = cell.cg_tol;
  sc.step_fraction = cell.theta;
  sc.target_objective_gap = cell.target_gap;
  return sc;
}

RunMetadata metadata(const CellSpec& cell) {
  RunMetadata meta;
  meta.method = method_name(cell.method);
  meta.seed = cell.seed;
  meta.n = cell.n;
  meta.d = cell.d;
  meta.r = cell.r;
  meta.m = cell.m;
  meta.kappa = cell.kappa;
  meta.pfail = cell.pfail;
  return meta;
}

RunResult dispatch(const CellSpec& cell, const CompositeOracle& oracle, const DenseMatrix& x0) {
  const SolverConfig sc = solver_config(cell);
  if (is_restarted(cell.method) && !cell.h0) {
    throw std::invalid_argument(method_name(cell.method) + " requires h0");
  }
  switch (cell.method) {
    case Method::kGnp: return gnp(oracle, x0, cell.T, sc);
    case Method::kRgnp: return rgnp(oracle, x0, cell.h0.value(), cell.T, cell.K, sc);
    case Method::kPolyak: return polyak_subgrad(oracle, x0, cell.T, sc);
    case Method::kRpolyak: return rpolyak(oracle, x0, cell.h0.value(), cell.T, cell.K, sc);
    case Method::kScaledSm: return scaled_sm(oracle, x0, cell.T, sc);
  }
  throw std::logic_error("unhandled method");
}

// Cells that differ only in the method share an instance.
std::string instance_key(const CellSpec& cell) {
  CellSpec base = cell;
  base.method = Method::kGnp;
  return base.label().substr(method_name(Method::kGnp).size() + 1);
}

std::string number_text(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::shared_ptr<const TensorSensingInstance> make_instance(const CellSpec& cell) {
  return std::make_shared<const TensorSensingInstance>(
      generate_instance(RandomStream(cell.seed), cell.params()));
}

DenseMatrix initial_point(const TensorSensingInstance& inst, const CellSpec& cell) {
  RandomStream stream = RandomStream(cell.seed).substream("init");
  return uniform_in_ball(stream, inst.x_star, cell.init_radius * inst.x_star.norm());
}

RunArtifact run_cell(const CellSpec& cell, const std::optional<std::filesystem::path>& out_dir,
                     bool wall_time) {
  RunArtifact artifact;
  artifact.cell = cell;
  try {
    const auto inst = make_instance(cell);
    const TensorSensingOracle oracle(inst);
    RunResult result = dispatch(cell, oracle, initial_point(*inst, cell));
    artifact.trace = std::move(result.trace);
    for (const RestartState& s : result.restarts) artifact.lower_bounds.push_back(s.h_k);
  } catch (const std::exception& e) {
    artifact.trace.failure = e.what();
  }
  artifact.trace.meta = metadata(cell);
  artifact.summary = summarize(artifact.trace, wall_time);
  if (out_dir) {
    artifact.trace_path = *out_dir / (cell.label() + ".csv");
    write_trace_csv(artifact.trace_path, artifact.trace, wall_time);
  }
  return artifact;
}

std::vector<RunArtifact> run_cells(const std::vector<CellSpec>& cells,
                                   const std::optional<std::filesystem::path>& out_dir,
                                   bool wall_time, int threads) {
  std::vector<RunArtifact> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        out[i] = run_cell(cells[i], out_dir, wall_time);
      } catch (const std::exception& e) {
        // Output errors are isolated to the cell as well.
        out[i].cell = cells[i];
        out[i].trace.meta = metadata(cells[i]);
        out[i].trace.failure = e.what();
        out[i].summary = summarize(out[i].trace, wall_time);
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
  if (count == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return out;
}

int thread_cap() {
  if (const char* env = std::getenv("GNP_BENCH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

bool ExperimentResult::ok() const {
  for (const RunArtifact& a : artifacts) {
    if (!a.ok()) return false;
  }
  return true;
}

std::vector<Series> experiment_series(const std::vector<RunArtifact>& artifacts,
                                      const PlotSpec& spec) {
  std::set<double> kappas, pfails;
  std::set<int> ns, ds, rs;
  for (const RunArtifact& a : artifacts) {
    kappas.insert(a.cell.kappa);
    pfails.insert(a.cell.pfail);
    ns.insert(a.cell.n);
    ds.insert(a.cell.d);
    rs.insert(a.cell.r);
  }
  std::vector<Series> out;
  for (const RunArtifact& a : artifacts) {
    if (a.trace.rows.empty()) continue;
    std::string label = method_name(a.cell.method);
    if (ns.size() > 1) label += " n=" + std::to_string(a.cell.n);
    if (ds.size() > 1) label += " d=" + std::to_string(a.cell.d);
    if (rs.size() > 1) label += " r=" + std::to_string(a.cell.r);
    if (kappas.size() > 1) label += " kappa=" + number_text(a.cell.kappa);
    if (pfails.size() > 1) label += " pfail=" + number_text(a.cell.pfail);
    out.push_back(trace_series(a.trace, spec.x, spec.y, label));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool sweep, int threads) {
  std::filesystem::create_directories(cfg.output_dir);
  ExperimentResult result;
  result.artifacts = run_cells(cfg.cells(), cfg.output_dir, cfg.record_wall_time, threads);

  std::vector<SummaryRow> rows;
  for (const RunArtifact& a : result.artifacts) rows.push_back(a.summary);
  result.summary_path = cfg.output_dir / (sweep ? "aggregate.csv" : "summary.csv");
  write_summary_csv(result.summary_path, rows);

  for (const PlotSpec& spec : cfg.plots) {
    // Wall-clock axes need recorded times.
    if (spec.x == "time" && !cfg.record_wall_time) continue;
    const auto series = experiment_series(result.artifacts, spec);
    const auto path = cfg.output_dir / ("plot_" + spec.x + "_" + spec.y + ".svg");
    const std::string x_label = spec.x == "time" ? "seconds" : "oracle calls";
    const std::string y_label = spec.y == "obj_gap" ? "objective gap" : "image distance";
    if (write_svg_plot(path, series, x_label, y_label, cfg.name)) result.plot_paths.push_back(path);
  }
  return result;
}

json check_experiment(const ExperimentConfig& cfg, bool& passed) {
  passed = true;
  const CheckSpec& spec = cfg.check;
  json report;
  report["config"] = cfg.name;
  report["thresholds"] = {{"fd_tol", spec.fd_tol}, {"sharpness_min_ratio", "> 0"},
                          {"rank", "constant over sampled points"}};
  json instances = json::array();
  std::set<std::string> seen;
  for (const CellSpec& cell : cfg.cells()) {
    if (!seen.insert(instance_key(cell)).second) continue;
    const auto inst = make_instance(cell);
    const double scale = inst->x_star.norm();
    json entry;
    entry["instance"] = instance_key(cell);
    entry["params"] = {{"n", cell.n},         {"d", cell.d},         {"r", cell.r},
                       {"m", cell.m},         {"kappa", cell.kappa}, {"pfail", cell.pfail},
                       {"seed", cell.seed}};

    // Finite differences at smooth random points.
    RandomStream fd_stream = RandomStream(cell.seed).substream("check-fd");
    double worst = 0.0;
    int checked = 0;
    int rejected = 0;
    for (int i = 0; i < spec.fd_points; ++i) {
      const FdReport fd =
          fd_pullback_check_sampled(*inst, fd_stream, spec.fd_radius * scale, spec.fd_step);
      if (fd.kink) {
        ++rejected;
        continue;
      }
      ++checked;
      worst = std::max(worst, fd.rel_error);
    }
    const bool fd_ok = checked == spec.fd_points && worst <= spec.fd_tol;
    entry["finite_difference"] = {{"points", checked}, {"rejected_points", rejected},
                                  {"max_rel_error", worst}, {"pass", fd_ok}};

    // Numerical rank of the Gram operator.
    bool rank_ok = true;
    if (static_cast<Eigen::Index>(cell.d) * cell.r <= kMaxDenseUnknowns) {
      RandomStream rank_stream = RandomStream(cell.seed).substream("check-rank");
      std::vector<int> ranks;
      bool ambiguous = false;
      RankReport last;
      for (int i = 0; i < spec.rank_points; ++i) {
        const DenseMatrix x = uniform_in_ball(rank_stream, inst->x_star, spec.rank_radius * scale);
        last = rank_report(x, cell.n, spec.rank_tol);
        ranks.push_back(last.rank);
        ambiguous = ambiguous || last.ambiguous;
      }
      rank_ok = std::set<int>(ranks.begin(), ranks.end()).size() == 1;
      entry["rank"] = {{"values", ranks},
                       {"measured", rank_ok ? json(ranks.front()) : json(nullptr)},
                       {"formula_r_r_plus_1_over_2", last.formula_half_r_r_plus_1},
                       {"formula_dr_minus_r_r_minus_1_over_2", last.formula_dr_minus_skew},
                       {"ambiguous", ambiguous},
                       {"pass", rank_ok}};
    } else {
      entry["rank"] = {{"skipped", "more than " + std::to_string(kMaxDenseUnknowns) + " unknowns"},
                       {"pass", true}};
    }

    // Sharpness and Lipschitz ratios.
    RandomStream sharp_stream = RandomStream(cell.seed).substream("check-sharpness");
    const SharpnessEstimate sharp =
        estimate_sharpness(*inst, sharp_stream, spec.sharpness_samples, spec.sharpness_radius * scale);
    const bool sharp_ok = sharp.mu_h > 0.0;
    entry["sharpness"] = {{"mu_h", sharp.mu_h}, {"lipschitz_h", sharp.lipschitz_h},
                          {"samples", sharp.ratios.size()}, {"skipped", sharp.skipped},
                          {"pass", sharp_ok}};

    // Rate of a GNP run against the theory constants (informational).
    if (sharp_ok && sharp.mu_h <= sharp.lipschitz_h) {
      ConstantInputs in = cfg.constants;
      in.mu_h = sharp.mu_h;
      in.lipschitz_h = sharp.lipschitz_h;
      const TheoryConstants constants = derive_constants(in);
      SolverConfig sc;
      sc.record_aiming = true;
      sc.cg_tol = cell.cg_tol;
      sc.target_objective_gap = spec.rate_eps * 1e-2;
      const TensorSensingOracle oracle(inst);
      const RunResult run = gnp(oracle, initial_point(*inst, cell), spec.gnp_T, sc);
      const RateReport rate = rate_report(run.trace, constants, spec.rate_eps, sharp.mu_h);
      json r;
      r["c1"] = rate.c1;
      r["c2"] = constants.c2;
      r["c3"] = constants.c3;
      r["delta"] = constants.delta;
      r["eta"] = constants.eta;
      r["assumed_inputs"] = {{"mu_c", in.mu_c},
                             {"lipschitz_grad_c", in.lipschitz_grad_c},
                             {"lipschitz_c", in.lipschitz_c},
                             {"curvature_c", in.curvature_c},
                             {"radius", in.radius}};
      r["fitted_factor"] = rate.fitted_factor;
      r["factor_within_c1"] = rate.factor_within_c1;
      r["envelope_c"] = rate.envelope_c;
      r["a0"] = rate.a0;
      r["eps"] = rate.eps;
      r["predicted_T"] = rate.predicted_T ? json(*rate.predicted_T) : json(nullptr);
      r["observed_iterations"] =
          rate.observed_iterations ? json(*rate.observed_iterations) : json(nullptr);
      r["aiming_checked"] = rate.aiming_checked;
      r["aiming_violations"] = rate.aiming_violations;
      entry["rate"] = r;
    }

    entry["pass"] = fd_ok && rank_ok && sharp_ok;
    passed = passed && fd_ok && rank_ok && sharp_ok;
    instances.push_back(entry);
  }
  report["instances"] = instances;
  report["pass"] = passed;
  return report;
}

}  // namespace gnp::bench
