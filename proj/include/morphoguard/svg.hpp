#pragma once

#include <string>
#include <vector>

namespace morphoguard::report {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line plot with axes, ticks and a legend. Throws
/// ConfigError when there is nothing to draw.
std::string line_plot_svg(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                          const std::string& y_label, bool log_y = false);

}  // namespace morphoguard::report
