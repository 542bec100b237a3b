#pragma once

#include <string>
#include <vector>

namespace stefan {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool steps = false;  ///< draw as a right-continuous step function
};

/// Static SVG line chart with axes, tick labels and a legend.
std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

}  // namespace stefan
