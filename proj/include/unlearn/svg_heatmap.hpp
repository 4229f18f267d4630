#pragma once

#include <string>
#include <vector>

#include "unlearn/results_io.hpp"

namespace unlearn {

struct HeatmapOptions {
  std::string value_column = "ratio";  // ratio | t_scratch_mean | t_unlearn_mean
  bool log_x = true;
  bool log_y = true;
  bool overlay_theory = false;
  int width = 960;
  int height = 680;
};

// Renders the (kdp, e) grid of cells as an SVG 1.1 heatmap: kdp on the x
// axis, e on the y axis (both log-scaled by default), a color bar, diagonal
// hatching over cells with censored runs, and optional overlay of the
// analytic regime boundaries (paths theory-trivial / theory-inefficient /
// theory-efficient / theory-e0). Throws std::runtime_error when the rows do
// not form a complete grid or the value column is unknown.
std::string render_svg_heatmap(const ParsedResults& results, const HeatmapOptions& opts);

void write_svg_heatmap(const std::string& path, const ParsedResults& results,
                       const HeatmapOptions& opts);

}  // namespace unlearn
