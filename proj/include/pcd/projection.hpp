#pragma once

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pcd/geometry.hpp"

namespace pcd {

struct IdentitySet {};

struct SingletonSet {
  Eigen::VectorXd point;
};

struct BoxSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct BallSet {
  Eigen::VectorXd center;
  double radius = 0.0;
};

struct AdmmOptions {
  double penalty = 10.0;     // xi
  int max_iterations = 700;  // K_max
  double tolerance = 2e-5;   // on the max primal-residual Frobenius norm
};

/// Trajectories (row-major H x 2) starting from `start` whose per-step
/// displacement never exceeds v_max * dt.
struct VelocityChainSet {
  Point2 start = Point2::Zero();
  double v_max = 1.0;
  double dt = 1.0;
  AdmmOptions admm;

  double step_limit() const noexcept { return v_max * dt; }
};

/// Convex hull of the columns of `exemplars` (d x M), projected by
/// exponentiated-gradient mirror descent on the simplex.
struct ConvexHullSet {
  Eigen::MatrixXd exemplars;
  double learning_rate = 1e-5;
  int iterations = 10000;
  double early_exit = 1e-12;  // on ||lambda^{k+1} - lambda^k||_inf
};

struct ProjectionInfo {
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;
};

struct ChainProjection {
  Eigen::VectorXd trajectory;
  ProjectionInfo info;
};

struct ChainBatchProjection {
  std::vector<Eigen::VectorXd> trajectories;
  ProjectionInfo info;
};

struct HullProjection {
  Eigen::VectorXd point;
  Eigen::VectorXd weights;
  int iterations = 0;
};

/// Hard-constraint operator Pi_K. Immutable after construction.
class ProjectionOperator {
 public:
  using Kind = std::variant<IdentitySet, SingletonSet, BoxSet, BallSet,
                            VelocityChainSet, ConvexHullSet>;

  ProjectionOperator() : kind_(IdentitySet{}) {}

  static ProjectionOperator identity() { return {}; }
  static ProjectionOperator singleton(Eigen::VectorXd point);
  static ProjectionOperator box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static ProjectionOperator ball(Eigen::VectorXd center, double radius);
  static ProjectionOperator velocity_chain(VelocityChainSet set);
  static ProjectionOperator convex_hull(ConvexHullSet set);

  const Kind& kind() const noexcept { return kind_; }
  bool is_identity() const noexcept {
    return std::holds_alternative<IdentitySet>(kind_);
  }
  /// Dimension the operator requires, or -1 when any size is accepted.
  Eigen::Index required_dim() const noexcept;

  Eigen::VectorXd project(const Eigen::VectorXd& x,
                          ProjectionInfo* info = nullptr) const;

 private:
  explicit ProjectionOperator(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
};

/// Cholesky factor of the tridiagonal SPD matrix 2 I_H + xi A^T A.
class ChainSystemFactor {
 public:
  ChainSystemFactor(Eigen::Index horizon, double penalty);

  Eigen::Index horizon() const noexcept { return diag_.size(); }
  /// Solves M X = V in place for every column of V (H x 2).
  void solve_in_place(Eigen::Ref<Eigen::MatrixX2d> v) const;

 private:
  Eigen::VectorXd diag_;   // L(i, i)
  Eigen::VectorXd lower_;  // L(i + 1, i)
};

/// Shared, lazily built factor for (H, xi); thread-safe.
std::shared_ptr<const ChainSystemFactor> chain_factor(Eigen::Index horizon,
                                                      double penalty);

ChainProjection project_velocity_chain(const VelocityChainSet& set,
                                       const Eigen::VectorXd& x_hat);

/// Batched ADMM sharing one factorization; stops when the largest residual
/// in the batch falls below tolerance.
ChainBatchProjection project_velocity_chain_batch(
    const VelocityChainSet& set, std::span<const Eigen::VectorXd> x_hats);

HullProjection project_convex_hull(const ConvexHullSet& set,
                                   const Eigen::VectorXd& x);

/// Largest violation max(0, ||X_h - X_{h-1}|| - v_max dt) along the chain.
double velocity_violation(const VelocityChainSet& set, const Eigen::VectorXd& traj);

}  // namespace pcd
