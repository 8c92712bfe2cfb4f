#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gnp/composite.hpp"

namespace gnp::bench {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// x_axis: oracle_calls | time; y_axis: obj_gap | image_dist. Throws
// std::runtime_error when the requested column holds no finite values.
Series trace_series(const RunRecord& trace, const std::string& x_axis, const std::string& y_axis,
                    const std::string& label);

// Line plot with a log-scale y axis and a legend. Points with y <= 0 or
// non-finite coordinates are dropped. Returns false and writes nothing when
// no series has a drawable point.
bool write_svg_plot(const std::filesystem::path& path, const std::vector<Series>& series,
                    const std::string& x_label, const std::string& y_label,
                    const std::string& title);

}  // namespace gnp::bench
