#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace pcd {

using Point2 = Eigen::Vector2d;

/// Row h of a row-major H x 2 trajectory stored as a flat vector.
inline Point2 waypoint(const Eigen::VectorXd& traj, Eigen::Index h) {
  return {traj[2 * h], traj[2 * h + 1]};
}

inline Eigen::Index horizon(const Eigen::VectorXd& traj) { return traj.size() / 2; }

struct Circle {
  Point2 center;
  double radius = 0.0;
};

/// Signed distance to the closest of a set of discs (negative inside).
/// Ties resolve to the lowest obstacle index.
class SignedDistanceField {
 public:
  SignedDistanceField() = default;
  explicit SignedDistanceField(std::vector<Circle> obstacles);

  bool empty() const noexcept { return obstacles_.empty(); }
  const std::vector<Circle>& obstacles() const noexcept { return obstacles_; }

  /// +infinity for an empty scene.
  double distance(const Point2& p) const;
  /// Gradient of the active obstacle's distance; zero at a disc center or in
  /// an empty scene.
  Point2 gradient(const Point2& p) const;

 private:
  std::optional<std::size_t> closest(const Point2& p, double* dist) const;

  std::vector<Circle> obstacles_;
};

}  // namespace pcd
