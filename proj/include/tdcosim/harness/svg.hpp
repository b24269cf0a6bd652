#pragma once

#include <string>
#include <vector>

namespace tdcosim::harness {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

struct BarPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  double bin_width = 1.0;
  std::vector<double> counts;  // bar i spans [i*w, (i+1)*w)
  std::vector<double> markers;  // vertical reference lines
};

std::string render_svg(const LinePlot& plot);
std::string render_svg(const BarPlot& plot);

}  // namespace tdcosim::harness
