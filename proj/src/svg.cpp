#include "fidkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fidkit {

namespace {

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(9);
  ss << v;
  return ss.str();
}

}  // namespace

std::string scatter_svg(const std::string& title, const std::string& xlabel,
                        const std::string& ylabel,
                        const std::vector<SvgSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::size_t npts = 0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::runtime_error("series \"" + s.label + "\": x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
      ++npts;
    }
  }
  if (npts == 0) throw std::runtime_error("nothing to plot");
  // Degenerate ranges get a unit span so the viewBox stays valid.
  if (xmax <= xmin) { xmin -= 0.5; xmax += 0.5; }
  if (ymax <= ymin) { ymin -= 0.5; ymax += 0.5; }
  const double xpad = 0.05 * (xmax - xmin);
  const double ypad = 0.05 * (ymax - ymin);
  const double x0 = xmin - xpad, y0 = ymin - ypad;
  const double w = (xmax - xmin) + 2 * xpad, h = (ymax - ymin) + 2 * ypad;
  const double r_unit = 0.5 * (w + h);
  const double font = 0.035 * r_unit;
  // Reflect y about the viewBox midline so larger y draws higher while
  // the viewBox remains the padded data range.
  auto fy = [&](double y) { return (y0 + (y0 + h)) - y; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(x0)
      << " " << num(y0) << " " << num(w) << " " << num(h)
      << "\" width=\"640\" height=\"640\">\n";
  svg << "<title>" << esc(title) << "</title>\n";
  svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\""
      << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"white\" stroke=\"#cccccc\" stroke-width=\""
      << num(0.002 * r_unit) << "\"/>\n";
  svg << "<text x=\"" << num(x0 + 0.02 * w) << "\" y=\""
      << num(y0 + 0.05 * h) << "\" font-size=\"" << num(font)
      << "\" font-family=\"sans-serif\">" << esc(title) << "</text>\n";
  svg << "<text x=\"" << num(x0 + 0.5 * w) << "\" y=\""
      << num(y0 + 0.99 * h) << "\" font-size=\"" << num(0.8 * font)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\">"
      << esc(xlabel) << "</text>\n";
  svg << "<text x=\"" << num(x0 + 0.015 * w) << "\" y=\""
      << num(y0 + 0.5 * h) << "\" font-size=\"" << num(0.8 * font)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 "
      << num(x0 + 0.015 * w) << " " << num(y0 + 0.5 * h) << ")\">"
      << esc(ylabel) << "</text>\n";
  double legend_y = y0 + 0.09 * h;
  for (const auto& s : series) {
    const double r = s.radius_frac * r_unit;
    svg << "<g fill=\"" << s.color << "\" fill-opacity=\"0.75\">\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg << "<circle cx=\"" << num(s.x[i]) << "\" cy=\"" << num(fy(s.y[i]))
          << "\" r=\"" << num(r) << "\"/>\n";
    svg << "</g>\n";
    if (!s.point_labels.empty()) {
      if (s.point_labels.size() != s.x.size())
        throw std::runtime_error("series \"" + s.label +
                                 "\": label count mismatch");
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << "<text x=\"" << num(s.x[i] + 1.5 * s.radius_frac * r_unit)
            << "\" y=\"" << num(fy(s.y[i])) << "\" font-size=\""
            << num(0.7 * font) << "\" font-family=\"sans-serif\">"
            << esc(s.point_labels[i]) << "</text>\n";
    }
    if (!s.label.empty()) {
      svg << "<circle cx=\"" << num(x0 + 0.03 * w) << "\" cy=\""
          << num(legend_y) << "\" r=\"" << num(s.radius_frac * r_unit)
          << "\" fill=\"" << s.color << "\"/>\n";
      svg << "<text x=\"" << num(x0 + 0.05 * w) << "\" y=\""
          << num(legend_y + 0.01 * h) << "\" font-size=\"" << num(0.7 * font)
          << "\" font-family=\"sans-serif\">" << esc(s.label) << "</text>\n";
      legend_y += 0.045 * h;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fidkit
