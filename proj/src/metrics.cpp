#include "pcd/metrics.hpp"

#include <algorithm>
#include <limits>

#include "pcd/error.hpp"

namespace pcd {
namespace {

void check_sequences(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int point_dim) {
  require(point_dim >= 1, ErrorCode::InvalidArgument, "point_dim must be >= 1");
  require(a.size() > 0 && b.size() > 0, ErrorCode::InvalidArgument,
          "trajectory distance of an empty sequence");
  require(a.size() % point_dim == 0 && b.size() % point_dim == 0,
          ErrorCode::DimensionMismatch, "sequence size not a multiple of point_dim");
}

Eigen::MatrixXd local_costs(const PointSequence& a, const PointSequence& b) {
  Eigen::MatrixXd d(a.length(), b.length());
  for (Eigen::Index i = 0; i < a.length(); ++i)
    for (Eigen::Index j = 0; j < b.length(); ++j)
      d(i, j) = (a.point(i) - b.point(j)).norm();
  return d;
}

}  // namespace

double dtw(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int point_dim) {
  check_sequences(a, b, point_dim);
  const Eigen::MatrixXd d = local_costs({a, point_dim}, {b, point_dim});
  const Eigen::Index n = d.rows(), m = d.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n + 1, m + 1, inf);
  acc(0, 0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i)
    for (Eigen::Index j = 1; j <= m; ++j)
      acc(i, j) = d(i - 1, j - 1) +
                  std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});
  return acc(n, m);
}

double dfd(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int point_dim) {
  check_sequences(a, b, point_dim);
  const Eigen::MatrixXd d = local_costs({a, point_dim}, {b, point_dim});
  const Eigen::Index n = d.rows(), m = d.cols();
  Eigen::MatrixXd ca(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      double prev;
      if (i == 0 && j == 0) prev = 0.0;
      else if (i == 0) prev = ca(0, j - 1);
      else if (j == 0) prev = ca(i - 1, 0);
      else prev = std::min({ca(i - 1, j - 1), ca(i - 1, j), ca(i, j - 1)});
      ca(i, j) = std::max(prev, d(i, j));
    }
  }
  return ca(n - 1, m - 1);
}

int constraint_satisfaction(const Eigen::VectorXd& traj, const Point2& start,
                            double v_max, double dt) {
  require(v_max > 0.0 && dt > 0.0, ErrorCode::InvalidArgument,
          "constraint check needs v_max > 0 and dt > 0");
  require(traj.size() % 2 == 0, ErrorCode::DimensionMismatch,
          "constraint check expects an H x 2 trajectory");
  const double limit = v_max * dt * (1.0 + 1e-6);
  Point2 prev = start;
  for (Eigen::Index h = 0; h < horizon(traj); ++h) {
    const Point2 p = waypoint(traj, h);
    if ((p - prev).norm() > limit) return 0;
    prev = p;
  }
  return 1;
}

int inter_robot_safety(std::span<const Eigen::VectorXd> trajs, double robot_radius) {
  for (std::size_t i = 0; i < trajs.size(); ++i)
    for (std::size_t j = i + 1; j < trajs.size(); ++j) {
      require(trajs[i].size() == trajs[j].size(), ErrorCode::DimensionMismatch,
              "inter-robot safety: horizon mismatch");
      for (Eigen::Index h = 0; h < horizon(trajs[i]); ++h)
        if ((waypoint(trajs[i], h) - waypoint(trajs[j], h)).norm() <= 2.0 * robot_radius)
          return 0;
    }
  return 1;
}

int obstacle_safe(std::span<const Eigen::VectorXd> trajs,
                  const SignedDistanceField& field, double robot_radius) {
  if (field.empty()) return 1;
  for (const auto& t : trajs)
    for (Eigen::Index h = 0; h < horizon(t); ++h)
      if (field.distance(waypoint(t, h)) <= robot_radius) return 0;
  return 1;
}

double success_rate(const std::vector<std::vector<int>>& tuple_ok) {
  require(!tuple_ok.empty(), ErrorCode::InvalidArgument, "success rate of no configurations");
  double hits = 0.0;
  for (const auto& cfg : tuple_ok) {
    require(!cfg.empty(), ErrorCode::InvalidArgument,
            "success rate: configuration with an empty batch");
    if (std::any_of(cfg.begin(), cfg.end(), [](int ok) { return ok != 0; })) hits += 1.0;
  }
  return hits / static_cast<double>(tuple_ok.size());
}

Point2 MotionPattern::direction(const Point2& p) const {
  if (kind == Kind::TowardGoal) return goal - p;
  const Point2 r = p - center;
  return {-r.y(), r.x()};
}

double data_adherence_proxy(const Eigen::VectorXd& traj, const MotionPattern& pattern) {
  require(traj.size() >= 2 && traj.size() % 2 == 0, ErrorCode::DimensionMismatch,
          "data adherence expects a non-empty H x 2 trajectory");
  const Eigen::Index h = horizon(traj);
  if (h < 2) return 1.0;
  int good = 0;
  for (Eigen::Index i = 0; i + 1 < h; ++i) {
    const Point2 p = waypoint(traj, i);
    const Point2 step = waypoint(traj, i + 1) - p;
    if (step.dot(pattern.direction(p)) > 0.0) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(h - 1);
}

}  // namespace pcd
