#include "gnp/bench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gnp::bench {
namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool drawable(double x, double y) { return std::isfinite(x) && std::isfinite(y) && y > 0.0; }

}  // namespace

Series trace_series(const RunRecord& trace, const std::string& x_axis, const std::string& y_axis,
                    const std::string& label) {
  if (x_axis != "oracle_calls" && x_axis != "time") {
    throw std::runtime_error("plot: unknown x axis '" + x_axis + "'");
  }
  if (y_axis != "obj_gap" && y_axis != "image_dist") {
    throw std::runtime_error("plot: unknown y axis '" + y_axis + "'");
  }
  Series s;
  s.label = label;
  bool any_x = false;
  bool any_y = false;
  for (const TraceRow& row : trace.rows) {
    const double x = x_axis == "time" ? row.time_sec : static_cast<double>(row.oracle_calls);
    const double y = y_axis == "obj_gap" ? row.obj_gap : row.image_dist;
    any_x = any_x || std::isfinite(x);
    any_y = any_y || std::isfinite(y);
    s.x.push_back(x);
    s.y.push_back(y);
  }
  if (!trace.rows.empty() && !any_x) {
    throw std::runtime_error("plot: column " + std::string(x_axis == "time" ? "time_sec" : x_axis) +
                             " has no finite values in trace '" + label + "'");
  }
  if (!trace.rows.empty() && !any_y) {
    throw std::runtime_error("plot: column " + y_axis + " has no finite values in trace '" +
                             label + "'");
  }
  return s;
}

bool write_svg_plot(const std::filesystem::path& path, const std::vector<Series>& series,
                    const std::string& x_label, const std::string& y_label,
                    const std::string& title) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!drawable(s.x[i], s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) return false;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  const double dec_lo = std::floor(std::log10(y_lo));
  double dec_hi = std::ceil(std::log10(y_hi));
  if (dec_hi <= dec_lo) dec_hi = dec_lo + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) {
    return kTop + (dec_hi - std::log10(y)) / (dec_hi - dec_lo) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";

  // Decade grid on the log axis.
  const int step = std::max(1, static_cast<int>((dec_hi - dec_lo) / 10.0 + 0.999));
  for (double dec = dec_lo; dec <= dec_hi + 1e-9; dec += step) {
    const double y = py(std::pow(10.0, dec));
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\">1e" << static_cast<int>(dec) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double x = px(xv);
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << kTop + plot_h + 20
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
  }
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(20," << kTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << " (log scale)</text>\n";

  std::size_t color = 0;
  double legend_y = kTop + 10;
  for (const Series& s : series) {
    const char* stroke = kPalette[color++ % std::size(kPalette)];
    std::ostringstream points;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!drawable(s.x[i], s.y[i])) continue;
      points << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
      ++count;
    }
    if (count == 0) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\""
        << points.str() << "\"/>\n";
    const double lx = kLeft + plot_w + 12;
    svg << "<line x1=\"" << lx << "\" y1=\"" << legend_y << "\" x2=\"" << lx + 20 << "\" y2=\""
        << legend_y << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << lx + 26 << "\" y=\"" << legend_y + 4 << "\">" << escape(s.label)
        << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg.str();
  return true;
}

}  // namespace gnp::bench
