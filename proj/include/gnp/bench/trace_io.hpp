#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnp/composite.hpp"

namespace gnp::bench {

inline constexpr std::string_view kTraceHeader =
    "method,seed,n,d,r,m,kappa,pfail,restart_k,iter,oracle_calls,time_sec,obj_gap,image_dist,"
    "step_size,proj_norm_sq,cg_iters,flags";

inline constexpr std::array<double, 7> kGapThresholds{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};

// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

// time_sec is written as nan unless wall_time is set, so repeated runs are
// byte-identical.
void write_trace_csv(std::ostream& out, const RunRecord& trace, bool wall_time);
void write_trace_csv(const std::filesystem::path& path, const RunRecord& trace, bool wall_time);

// Throws std::runtime_error when the header or a row does not match the schema.
RunRecord read_trace_csv(const std::filesystem::path& path);

struct SummaryRow {
  RunMetadata meta;
  std::string status;  // "ok" or the failure message
  long rows = 0;
  double final_gap = kMissing;
  double best_gap = kMissing;
  std::array<std::optional<long>, kGapThresholds.size()> calls;
  std::array<std::optional<double>, kGapThresholds.size()> seconds;
};

SummaryRow summarize(const RunRecord& trace, bool wall_time);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

}  // namespace gnp::bench
