#pragma once

#include <string>
#include <vector>

namespace fidkit {

struct SvgSeries {
  std::string label;
  std::string color = "#1f77b4";
  double radius_frac = 0.006;  // circle radius as a fraction of the range
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> point_labels;  // optional, one per point
};

// Scatter plot as a standalone SVG string. The root viewBox is exactly
// the data range of all series padded by 5% per axis; one <circle> per
// point. Points are drawn y-up by reflecting about the range midline, so
// the viewBox stays equal to the padded data range.
std::string scatter_svg(const std::string& title, const std::string& xlabel,
                        const std::string& ylabel,
                        const std::vector<SvgSeries>& series);

}  // namespace fidkit
