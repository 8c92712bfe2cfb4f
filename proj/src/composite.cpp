#include "gnp/composite.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace gnp {

void SolverConfig::validate() const {
  if (!(step_fraction >= 0.5 && step_fraction <= 1.0)) {
    throw std::invalid_argument("SolverConfig: step_fraction must lie in [1/2, 1]");
  }
  if (!(cg_tol > 0.0)) throw std::invalid_argument("SolverConfig: cg_tol must be positive");
  if (max_oracle_calls < 1) throw std::invalid_argument("SolverConfig: max_oracle_calls < 1");
  if (!(critical_norm_floor >= 0.0)) {
    throw std::invalid_argument("SolverConfig: critical_norm_floor must be nonnegative");
  }
  if (time_budget && !(*time_budget > 0.0)) {
    throw std::invalid_argument("SolverConfig: time_budget must be positive");
  }
}

std::string flags_to_string(unsigned flags) {
  static constexpr std::array<std::pair<unsigned, const char*>, 7> kNames{{
      {kNearCritical, "near_critical"},
      {kCgFailed, "cg_failed"},
      {kStepSkipped, "step_skipped"},
      {kTargetReached, "target_reached"},
      {kBudgetExhausted, "budget_exhausted"},
      {kFinal, "final"},
      {kFailure, "failure"},
  }};
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

std::optional<long> RunRecord::calls_to_gap(double threshold) const {
  for (const TraceRow& row : rows) {
    if (row.obj_gap <= threshold) return row.oracle_calls;
  }
  return std::nullopt;
}

std::optional<double> RunRecord::seconds_to_gap(double threshold) const {
  for (const TraceRow& row : rows) {
    if (row.obj_gap <= threshold) return row.time_sec;
  }
  return std::nullopt;
}

double RunRecord::best_h() const { return rows.at(best_index(*this)).h_value; }

std::size_t best_index(const RunRecord& trace) {
  if (trace.rows.empty()) throw std::invalid_argument("best_index: empty trace");
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    if (trace.rows[i].h_value < trace.rows[best].h_value) best = i;
  }
  return best;
}

DenseMatrix best_iterate(const RunRecord& trace, const std::vector<DenseMatrix>& iterates) {
  if (iterates.size() != trace.rows.size()) {
    throw std::invalid_argument("best_iterate: iterate count does not match the trace");
  }
  return iterates[best_index(trace)];
}

}  // namespace gnp
