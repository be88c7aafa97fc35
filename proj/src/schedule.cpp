#include "pcd/schedule.hpp"

#include <cmath>
#include <string>

#include "pcd/error.hpp"

namespace pcd {

DiffusionSchedule::DiffusionSchedule(std::vector<double> beta)
    : beta_(std::move(beta)) {
  require(!beta_.empty(), ErrorCode::Configuration,
          "schedule needs at least one step");
  alpha_.reserve(beta_.size());
  bar_alpha_.reserve(beta_.size());
  posterior_var_.reserve(beta_.size());
  double prod = 1.0;
  for (double b : beta_) {
    require(b > 0.0 && b < 1.0, ErrorCode::Configuration,
            "beta must lie in (0, 1), got " + std::to_string(b));
    const double prev = prod;
    const double a = 1.0 - b;
    prod *= a;
    alpha_.push_back(a);
    bar_alpha_.push_back(prod);
    // A step whose cumulative product rounds to 1 has no posterior spread.
    posterior_var_.push_back(prod == 1.0 ? 0.0 : (1.0 - prev) / (1.0 - prod) * b);
  }
}

std::size_t DiffusionSchedule::index(int t) const {
  require(t >= 1 && t <= steps(), ErrorCode::InvalidArgument,
          "schedule step " + std::to_string(t) + " outside [1, " +
              std::to_string(steps()) + "]");
  return static_cast<std::size_t>(t - 1);
}

DiffusionSchedule make_linear_schedule(int steps, double beta_min,
                                       double beta_max) {
  require(steps >= 1, ErrorCode::Configuration, "schedule steps must be >= 1");
  require(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0,
          ErrorCode::Configuration,
          "linear schedule needs 0 < beta_min <= beta_max < 1");
  std::vector<double> beta(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    beta[static_cast<std::size_t>(i)] = beta_min + (beta_max - beta_min) * frac;
  }
  return DiffusionSchedule(std::move(beta));
}

NoiseLevel NoiseLevel::step(const DiffusionSchedule& schedule, int t) {
  return NoiseLevel(t, schedule.bar_alpha(t));
}

NoiseLevel NoiseLevel::with_bar_alpha(double bar_alpha) {
  require(bar_alpha > 0.0 && bar_alpha <= 1.0, ErrorCode::InvalidArgument,
          "bar_alpha must lie in (0, 1]");
  return NoiseLevel(-1, bar_alpha);
}

Eigen::VectorXd tweedie_denoise(const NoiseLevel& level,
                                const Eigen::VectorXd& score,
                                const Eigen::VectorXd& x) {
  require(score.size() == x.size(), ErrorCode::DimensionMismatch,
          "tweedie: score and x differ in size");
  const double ab = level.bar_alpha();
  return (x + (1.0 - ab) * score) / std::sqrt(ab);
}

Eigen::VectorXd tweedie_denoise(const DiffusionSchedule& schedule,
                                const Eigen::VectorXd& score,
                                const Eigen::VectorXd& x, int t) {
  return tweedie_denoise(NoiseLevel::step(schedule, t), score, x);
}

}  // namespace pcd
