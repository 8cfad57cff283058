#pragma once

#include <string>
#include <vector>

namespace mmdest {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> error;  // optional half-width of an error bar per point
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 640;
  int height = 420;
};

/// Self-contained SVG document: axes with ticks, one polyline with markers per series, legend.
std::string render_svg(const LineChart& chart);

}  // namespace mmdest
