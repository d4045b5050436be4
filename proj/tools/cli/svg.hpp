#pragma once

// Minimal static SVG line charts for quick inspection of curve CSVs.

#include <string>
#include <vector>

namespace brbvs::cli {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string colour = "#1f77b4";
  bool dashed = false;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series, double y_min, double y_max);

}  // namespace brbvs::cli
