#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pcd/geometry.hpp"

namespace pcd {

/// Sequence of `point_dim`-dimensional points stored row-major in a flat
/// vector; planar trajectories use point_dim = 2.
struct PointSequence {
  const Eigen::VectorXd& data;
  int point_dim = 2;

  Eigen::Index length() const { return data.size() / point_dim; }
  auto point(Eigen::Index i) const { return data.segment(i * point_dim, point_dim); }
};

/// Dynamic time warping with Euclidean local cost, steps {match, insert,
/// delete}, unnormalized.
double dtw(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int point_dim = 2);

/// Discrete Frechet distance.
double dfd(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int point_dim = 2);

/// 1 iff the first step from `start` and every later step stay within
/// v_max * dt * (1 + 1e-6).
int constraint_satisfaction(const Eigen::VectorXd& traj, const Point2& start,
                            double v_max, double dt = 1.0);

/// 1 iff every pair of robots stays more than 2R apart at every step.
int inter_robot_safety(std::span<const Eigen::VectorXd> trajs, double robot_radius);

/// 1 iff every waypoint keeps signed distance greater than R.
int obstacle_safe(std::span<const Eigen::VectorXd> trajs,
                  const SignedDistanceField& field, double robot_radius);

/// Per-configuration success indicators: tuple_ok[c][b] says whether tuple b
/// of configuration c is free of robot and obstacle collisions. Returns the
/// mean over configurations of "at least one tuple succeeded".
double success_rate(const std::vector<std::vector<int>>& tuple_ok);

/// Motion pattern used by the data-adherence proxy.
struct MotionPattern {
  enum class Kind { TowardGoal, CounterClockwise } kind = Kind::TowardGoal;
  Point2 goal = Point2::Zero();    // TowardGoal
  Point2 center = Point2::Zero();  // CounterClockwise

  Point2 direction(const Point2& p) const;
};

/// Proxy for data adherence: fraction of steps X_h -> X_{h+1} whose
/// displacement has positive inner product with the pattern at X_h.
/// Trajectories with a single waypoint score 1.
double data_adherence_proxy(const Eigen::VectorXd& traj, const MotionPattern& pattern);

}  // namespace pcd
