#pragma once
// Minimal SVG line plots: fixed 800x500 layout, auto-ranged axes with
// nice-number ticks, one polyline per series.  No plotting dependency; the
// output is a self-contained <svg> document.

#include <string>
#include <vector>

namespace supcar {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<PlotSeries>& series);

}  // namespace supcar
