#ifndef OPSCALE_TOOLS_SVG_PLOT_H
#define OPSCALE_TOOLS_SVG_PLOT_H

#include <string>
#include <vector>

namespace opscale::tools {

// One curve: mean with an optional +-std band. x and mean must have equal
// length; std is either empty or the same length.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 460;
  // Values at or below this are clipped before taking log10.
  double y_floor = 1e-17;
};

// Standalone SVG document with a log10 y axis and a linear x axis.
std::string render_log_plot(const std::vector<Series>& series, const PlotOptions& opt);

}  // namespace opscale::tools

#endif  // OPSCALE_TOOLS_SVG_PLOT_H
