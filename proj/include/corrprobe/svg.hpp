#pragma once

#include <istream>
#include <string>
#include <vector>

namespace corrprobe::svg {

struct ScatterPoint {
  std::string label;
  double x = 0.0;
  double y = 0.0;
};

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ScatterPoint> points;
  bool has_fit = false;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Standalone SVG. Circles carry data-x/data-y, the fitted line carries
/// data-slope/data-intercept, all in shortest round-trip form.
std::string render_scatter(const ScatterPlot& plot);

struct Series {
  std::string name;
  std::vector<double> steps;
  std::vector<double> values;
};

/// CSV with a header `step,<name>,...`; empty cells are gaps.
std::vector<Series> parse_series_csv(std::istream& in, const std::string& source_name);

std::string render_series(const std::string& title, const std::vector<Series>& series);

std::string escape(std::string_view s);

}  // namespace corrprobe::svg
