#include "pcd/geometry.hpp"

#include <limits>

#include "pcd/error.hpp"

namespace pcd {

SignedDistanceField::SignedDistanceField(std::vector<Circle> obstacles)
    : obstacles_(std::move(obstacles)) {
  for (const auto& c : obstacles_)
    require(c.radius > 0.0, ErrorCode::Configuration,
            "obstacle radius must be positive");
}

std::optional<std::size_t> SignedDistanceField::closest(const Point2& p,
                                                        double* dist) const {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < obstacles_.size(); ++i) {
    const double d = (p - obstacles_[i].center).norm() - obstacles_[i].radius;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  *dist = best_d;
  return best;
}

double SignedDistanceField::distance(const Point2& p) const {
  double d;
  closest(p, &d);
  return d;
}

Point2 SignedDistanceField::gradient(const Point2& p) const {
  double d;
  const auto idx = closest(p, &d);
  if (!idx) return Point2::Zero();
  const Point2 diff = p - obstacles_[*idx].center;
  const double n = diff.norm();
  if (n == 0.0) return Point2::Zero();
  return diff / n;
}

}  // namespace pcd
