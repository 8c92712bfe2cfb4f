// gnp-bench: run, sweep, check and plot tensor-sensing experiments.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gnp/bench/config.hpp"
#include "gnp/bench/runner.hpp"

namespace {

using namespace gnp::bench;

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCheckFailure = 3;

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool wall_time = false;
};

ExperimentConfig resolve(const CommonOptions& opts) {
  if (opts.config_path.empty() == opts.preset_name.empty()) {
    throw ConfigError("exactly one of --config or --preset is required");
  }
  nlohmann::json doc;
  if (!opts.preset_name.empty()) {
    doc = {{"preset", opts.preset_name}};
  } else {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("config: cannot open " + opts.config_path);
    try {
      in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config: " + opts.config_path + ": " + e.what());
    }
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  if (!opts.out_dir.empty()) doc["output_dir"] = opts.out_dir;
  if (opts.seed) doc["seed"] = *opts.seed;
  if (opts.wall_time) doc["record_wall_time"] = true;
  return parse_config(doc);
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_seed) {
  cmd->add_option("--config", opts.config_path, "Experiment configuration (JSON)");
  cmd->add_option("--preset", opts.preset_name, "Named preset instead of a config file")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--out", opts.out_dir, "Output directory (overrides output_dir)");
  if (with_seed) cmd->add_option("--seed", opts.seed, "Seed (overrides the config)");
  cmd->add_flag("--wall-time", opts.wall_time,
                "Record wall-clock seconds in traces (output is then not reproducible)");
}

std::string optional_calls(const std::optional<long>& v) {
  return v ? std::to_string(*v) : std::string("-");
}

int report_experiment(const ExperimentResult& result) {
  std::printf("%-44s %8s %12s %10s %10s  %s\n", "run", "rows", "final_gap", "calls@1e-6",
              "calls@1e-8", "status");
  for (const RunArtifact& a : result.artifacts) {
    std::printf("%-44s %8ld %12.3e %10s %10s  %s\n", a.cell.label().c_str(), a.summary.rows,
                a.summary.final_gap, optional_calls(a.summary.calls[4]).c_str(),
                optional_calls(a.summary.calls[6]).c_str(), a.summary.status.c_str());
  }
  std::printf("summary: %s\n", result.summary_path.string().c_str());
  for (const auto& p : result.plot_paths) std::printf("plot: %s\n", p.string().c_str());
  return result.ok() ? kExitOk : kExitRunFailure;
}

int plot_directory(const std::string& in_dir, const std::string& x, const std::string& y,
                   const std::string& out_path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(in_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
      if (entry.path().extension() != ".csv") continue;
      std::ifstream in(entry.path());
      std::string header;
      std::getline(in, header);
      if (header == kTraceHeader) files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "plot: no trace CSVs found in " << in_dir << "; nothing written\n";
    return kExitRunFailure;
  }
  std::vector<Series> series;
  for (const auto& file : files) {
    series.push_back(trace_series(read_trace_csv(file), x, y, file.stem().string()));
  }
  const std::filesystem::path target =
      out_path.empty() ? std::filesystem::path(in_dir) / ("plot_" + x + "_" + y + ".svg")
                       : std::filesystem::path(out_path);
  const std::string x_label = x == "time" ? "seconds" : "oracle calls";
  const std::string y_label = y == "obj_gap" ? "objective gap" : "image distance";
  if (!write_svg_plot(target, series, x_label, y_label, std::filesystem::path(in_dir).filename().string())) {
    std::cerr << "plot: traces contain no positive " << y << " values; nothing written\n";
    return kExitRunFailure;
  }
  std::printf("plot: %s (%zu curves)\n", target.string().c_str(), series.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauss-Newton-Polyak tensor sensing benchmarks"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run every cell of a configuration");
  add_common(run, run_opts, true);

  CommonOptions sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a grid concurrently and write aggregate.csv");
  add_common(sweep, sweep_opts, true);

  CommonOptions check_opts;
  CLI::App* check = app.add_subcommand("check", "Diagnostics report (JSON) for each instance");
  add_common(check, check_opts, true);

  std::string plot_in, plot_x = "oracle_calls", plot_y = "obj_gap", plot_out;
  CLI::App* plot = app.add_subcommand("plot", "SVG plot of the trace CSVs in a directory");
  plot->add_option("--in", plot_in, "Directory with trace CSVs")->required();
  plot->add_option("--x", plot_x, "x axis")->check(CLI::IsMember({"oracle_calls", "time"}));
  plot->add_option("--y", plot_y, "y axis")->check(CLI::IsMember({"obj_gap", "image_dist"}));
  plot->add_option("--out", plot_out, "Output SVG path");

  CLI::App* presets = app.add_subcommand("presets", "Print the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run || *sweep) {
      const bool is_sweep = sweep->parsed();
      const ExperimentConfig cfg = resolve(is_sweep ? sweep_opts : run_opts);
      return report_experiment(run_experiment(cfg, is_sweep, thread_cap()));
    }
    if (*check) {
      const ExperimentConfig cfg = resolve(check_opts);
      bool passed = false;
      const nlohmann::json report = check_experiment(cfg, passed);
      std::cout << report.dump(2) << '\n';
      if (!check_opts.out_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream(cfg.output_dir / "check.json") << report.dump(2) << '\n';
      }
      return passed ? kExitOk : kExitCheckFailure;
    }
    if (*plot) return plot_directory(plot_in, plot_x, plot_y, plot_out);
    if (*presets) {
      nlohmann::json all;
      for (const std::string& name : preset_names()) all[name] = preset(name);
      std::cout << all.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitOk;
}
