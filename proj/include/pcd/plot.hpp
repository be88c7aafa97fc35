#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcd/geometry.hpp"

namespace pcd {

/// Everything needed to redraw one run cell.
struct PlotData {
  enum class Kind { Corridor, Navigation } kind = Kind::Navigation;
  double gamma = 0.0;

  // corridor
  double corridor_length = 9.0;
  std::vector<double> block_lengths{6.0, 2.0};
  std::vector<double> first;   // big-block centers
  std::vector<double> second;  // small-block centers

  // navigation
  double half_width = 12.0;
  double robot_radius = 0.5;
  double v_max = 1.0;
  double dt = 1.0;
  std::vector<Circle> obstacles;
  std::vector<Point2> starts;
  std::vector<Point2> goals;
  /// tuples[b][robot]: flattened H x 2 trajectory.
  std::vector<std::vector<Eigen::VectorXd>> tuples;
};

std::string plot_data_to_json(const PlotData& data);
PlotData plot_data_from_json(const std::string& text);

/// Self-contained SVG. Navigation plots mark collisions with red crosses and
/// velocity violations with blue stars; corridor plots show one histogram per
/// block.
std::string render_svg(const PlotData& data);

void emit_plot(const PlotData& data, const std::filesystem::path& path);

}  // namespace pcd
