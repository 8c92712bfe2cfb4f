#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "gnp/bench/config.hpp"
#include "gnp/bench/plot.hpp"
#include "gnp/bench/trace_io.hpp"
#include "gnp/tensor_sensing.hpp"

namespace gnp::bench {

struct RunArtifact {
  CellSpec cell;
  RunRecord trace;
  // h_0, h_1, ... for restarted methods; empty otherwise.
  std::vector<double> lower_bounds;
  std::filesystem::path trace_path;  // empty when no output directory was given
  SummaryRow summary;

  bool ok() const { return trace.failure.empty(); }
};

std::shared_ptr<const TensorSensingInstance> make_instance(const CellSpec& cell);

// Uniform in the ball of radius init_radius * ||X*||_F around X*, drawn from
// the "init" substream of the cell seed.
DenseMatrix initial_point(const TensorSensingInstance& inst, const CellSpec& cell);

// Solver exceptions are caught and recorded as the trace failure.
RunArtifact run_cell(const CellSpec& cell, const std::optional<std::filesystem::path>& out_dir,
                     bool wall_time);

// Runs cells on up to `threads` workers; results keep the input order.
std::vector<RunArtifact> run_cells(const std::vector<CellSpec>& cells,
                                   const std::optional<std::filesystem::path>& out_dir,
                                   bool wall_time, int threads);

// GNP_BENCH_THREADS when set to a positive integer, else the hardware count.
int thread_cap();

struct ExperimentResult {
  std::vector<RunArtifact> artifacts;
  std::filesystem::path summary_path;
  std::vector<std::filesystem::path> plot_paths;

  bool ok() const;
};

// Writes one trace CSV per cell, a summary table ("summary.csv", or
// "aggregate.csv" for sweeps) and the configured plots under output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool sweep, int threads);

// Legend text: method plus every grid dimension that varies across cells.
std::vector<Series> experiment_series(const std::vector<RunArtifact>& artifacts,
                                      const PlotSpec& spec);

// Diagnostics report for every distinct instance of the grid. `passed` is
// cleared when a finite-difference, rank-constancy or sharpness threshold fails.
nlohmann::json check_experiment(const ExperimentConfig& cfg, bool& passed);

}  // namespace gnp::bench
