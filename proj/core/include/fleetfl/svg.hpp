#pragma once

#include <string>
#include <vector>

namespace fleetfl::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Standalone SVG document with one polyline per series and a legend.
std::string line_chart(const Axes& axes, const std::vector<Series>& series);

/// Stacked bars: one bar per category, one stacked segment per series (y values).
std::string stacked_bars(const Axes& axes, const std::vector<std::string>& categories,
                         const std::vector<Series>& series);

}  // namespace fleetfl::svg
