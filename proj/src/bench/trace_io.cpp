#include "gnp/bench/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gnp::bench {
namespace {

unsigned flags_from_string(const std::string& text) {
  unsigned flags = kNone;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = std::min(text.find('|', start), text.size());
    const std::string name = text.substr(start, end - start);
    for (unsigned bit = 1; bit <= kFailure; bit <<= 1) {
      if (flags_to_string(bit) == name) flags |= bit;
    }
    start = end + 1;
  }
  return flags;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& text, const std::filesystem::path& path) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error("trace " + path.string() + ": cannot parse '" + text + "'");
  }
  return value;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

// 1e-2 -> "1e-2"
std::string threshold_name(double t) {
  return "1e-" + std::to_string(std::lround(-std::log10(t)));
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const RunRecord& trace, bool wall_time) {
  const RunMetadata& meta = trace.meta;
  const std::string prefix = meta.method + ',' + std::to_string(meta.seed) + ',' +
                             std::to_string(meta.n) + ',' + std::to_string(meta.d) + ',' +
                             std::to_string(meta.r) + ',' + std::to_string(meta.m) + ',' +
                             format_number(meta.kappa) + ',' + format_number(meta.pfail) + ',';
  out << kTraceHeader << '\n';
  for (const TraceRow& row : trace.rows) {
    out << prefix << row.restart_k << ',' << row.iter << ',' << row.oracle_calls << ','
        << format_number(wall_time ? row.time_sec : kMissing) << ',' << format_number(row.obj_gap)
        << ',' << format_number(row.image_dist) << ',' << format_number(row.step_size) << ','
        << format_number(row.proj_norm_sq) << ',' << row.cg_iters << ','
        << flags_to_string(row.flags) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunRecord& trace, bool wall_time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(out, trace, wall_time);
}

RunRecord read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error("trace " + path.string() + ": unexpected header");
  }
  RunRecord trace;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 18) {
      throw std::runtime_error("trace " + path.string() + ": expected 18 columns, got " +
                               std::to_string(f.size()));
    }
    if (first) {
      trace.meta.method = f[0];
      trace.meta.seed = parse_field<std::uint64_t>(f[1], path);
      trace.meta.n = parse_field<int>(f[2], path);
      trace.meta.d = parse_field<int>(f[3], path);
      trace.meta.r = parse_field<int>(f[4], path);
      trace.meta.m = parse_field<int>(f[5], path);
      trace.meta.kappa = parse_field<double>(f[6], path);
      trace.meta.pfail = parse_field<double>(f[7], path);
      first = false;
    }
    TraceRow row;
    row.restart_k = parse_field<int>(f[8], path);
    row.iter = parse_field<int>(f[9], path);
    row.oracle_calls = parse_field<long>(f[10], path);
    row.time_sec = parse_field<double>(f[11], path);
    row.obj_gap = parse_field<double>(f[12], path);
    row.image_dist = parse_field<double>(f[13], path);
    row.step_size = parse_field<double>(f[14], path);
    row.proj_norm_sq = parse_field<double>(f[15], path);
    row.cg_iters = parse_field<int>(f[16], path);
    row.flags = flags_from_string(f[17]);
    trace.rows.push_back(row);
  }
  return trace;
}

SummaryRow summarize(const RunRecord& trace, bool wall_time) {
  SummaryRow s;
  s.meta = trace.meta;
  s.status = trace.failure.empty() ? "ok" : trace.failure;
  s.rows = static_cast<long>(trace.rows.size());
  if (!trace.rows.empty()) {
    s.final_gap = trace.rows.back().obj_gap;
    s.best_gap = trace.rows[best_index(trace)].obj_gap;
  }
  for (std::size_t i = 0; i < kGapThresholds.size(); ++i) {
    s.calls[i] = trace.calls_to_gap(kGapThresholds[i]);
    if (wall_time) s.seconds[i] = trace.seconds_to_gap(kGapThresholds[i]);
  }
  return s;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "method,seed,n,d,r,m,kappa,pfail,status,rows,final_gap,best_gap";
  for (double t : kGapThresholds) out << ",calls_" << threshold_name(t);
  for (double t : kGapThresholds) out << ",sec_" << threshold_name(t);
  out << '\n';
  for (const SummaryRow& s : rows) {
    std::string status = s.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << s.meta.method << ',' << s.meta.seed << ',' << s.meta.n << ',' << s.meta.d << ','
        << s.meta.r << ',' << s.meta.m << ',' << format_number(s.meta.kappa) << ','
        << format_number(s.meta.pfail) << ',' << status << ',' << s.rows << ','
        << format_number(s.final_gap) << ',' << format_number(s.best_gap);
    for (const auto& c : s.calls) out << ',' << (c ? std::to_string(*c) : std::string());
    for (const auto& sec : s.seconds) out << ',' << format_optional(sec);
    out << '\n';
  }
}

}  // namespace gnp::bench
