#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gacl::plot {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool markers = false;
};

/// Simple standalone SVG line chart. Output depends only on the inputs.
struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> vertical_markers;  // dashed x positions, e.g. stage boundaries
  bool equal_aspect = false;             // for top-down trajectory views
  int width = 720;
  int height = 480;

  /// Throws std::invalid_argument if there is nothing to draw.
  std::string render() const;
};

std::string escape_xml(const std::string& text);

}  // namespace gacl::plot
