#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lpw::app {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
  /// Draw unconnected markers instead of a polyline.
  bool markers = false;
  /// Optional symmetric error bars, one per point.
  std::vector<double> errors;
};

struct PlotLine {
  double y = 0.0;
  std::string label;
  std::string color = "#888888";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<PlotLine> hlines;
};

/// Standalone SVG line plot with axes, ticks and a legend.
std::string render_svg(const Plot& plot);

}  // namespace lpw::app
