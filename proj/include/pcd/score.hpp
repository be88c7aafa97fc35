#pragma once

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pcd/schedule.hpp"

namespace pcd {

/// Diagonal Gaussian N(mean, diag(variance)).
struct GaussianPrior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// One isotropic component of a mixture.
struct IsotropicComponent {
  Eigen::VectorXd mean;
  double variance = 1.0;
};

struct GaussianMixturePrior {
  std::vector<double> weights;
  std::vector<IsotropicComponent> components;
};

/// Trajectory prior: independent isotropic Gaussians around a nominal path.
/// `nominal` is row-major H x 2 flattened; `waypoint_variance` has H entries.
struct NominalPathPrior {
  Eigen::VectorXd nominal;
  Eigen::VectorXd waypoint_variance;
};

/// Analytic score model whose noised marginals stay closed-form under the
/// variance-preserving forward process:
///   N(m, v) at data level becomes N(sqrt(ab) m, ab v + 1 - ab) at level ab.
class ScoreModel {
 public:
  using Kind = std::variant<GaussianPrior, GaussianMixturePrior, NominalPathPrior>;

  static ScoreModel gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance);
  static ScoreModel isotropic_gaussian(Eigen::VectorXd mean, double variance);
  static ScoreModel standard_normal(Eigen::Index dim);
  static ScoreModel mixture(std::vector<double> weights,
                            std::vector<IsotropicComponent> components);
  static ScoreModel nominal_path(Eigen::VectorXd nominal,
                                 Eigen::VectorXd waypoint_variance);

  Eigen::Index dim() const noexcept { return dim_; }
  const Kind& kind() const noexcept { return kind_; }

  /// grad_x log p_level(x).
  Eigen::VectorXd score(const Eigen::VectorXd& x, const NoiseLevel& level) const;
  /// Fully normalized log p_level(x).
  double log_density(const Eigen::VectorXd& x, const NoiseLevel& level) const;
  /// Hessian of log p_level at x applied to v (the score Jacobian is symmetric).
  Eigen::VectorXd score_jacobian_product(const Eigen::VectorXd& x,
                                         const NoiseLevel& level,
                                         const Eigen::VectorXd& v) const;

 private:
  ScoreModel(Kind kind, Eigen::Index dim) : kind_(std::move(kind)), dim_(dim) {}

  void check_dim(const Eigen::VectorXd& x) const;

  Kind kind_;
  Eigen::Index dim_;
};

/// Per-coordinate moments of a diagonal Gaussian pushed to `level`.
GaussianPrior noised_gaussian(const GaussianPrior& prior, const NoiseLevel& level);

}  // namespace pcd
