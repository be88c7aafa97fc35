#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace pcd {

/// Discrete variance-preserving noise schedule, indexed 1..T.
class DiffusionSchedule {
 public:
  explicit DiffusionSchedule(std::vector<double> beta);

  int steps() const noexcept { return static_cast<int>(beta_.size()); }

  double beta(int t) const { return beta_.at(index(t)); }
  double alpha(int t) const { return alpha_.at(index(t)); }
  double bar_alpha(int t) const { return bar_alpha_.at(index(t)); }
  /// ((1 - bar_alpha_{t-1}) / (1 - bar_alpha_t)) * beta_t, with bar_alpha_0 = 1.
  double posterior_variance(int t) const { return posterior_var_.at(index(t)); }

  const std::vector<double>& betas() const noexcept { return beta_; }
  const std::vector<double>& bar_alphas() const noexcept { return bar_alpha_; }

 private:
  std::size_t index(int t) const;

  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> bar_alpha_;
  std::vector<double> posterior_var_;
};

DiffusionSchedule make_linear_schedule(int steps, double beta_min,
                                       double beta_max);

/// Either the clean data distribution or the marginal at schedule step t.
class NoiseLevel {
 public:
  static NoiseLevel data() noexcept { return NoiseLevel(0, 1.0); }
  static NoiseLevel step(const DiffusionSchedule& schedule, int t);
  /// Raw marginal level; used by degenerate schedules in tests.
  static NoiseLevel with_bar_alpha(double bar_alpha);

  bool is_data() const noexcept { return step_ == 0; }
  int step_index() const noexcept { return step_; }
  double bar_alpha() const noexcept { return bar_alpha_; }
  /// Variance of the injected Gaussian, 1 - bar_alpha.
  double noise_variance() const noexcept { return 1.0 - bar_alpha_; }

 private:
  NoiseLevel(int step, double bar_alpha) noexcept
      : step_(step), bar_alpha_(bar_alpha) {}

  int step_;
  double bar_alpha_;
};

/// Posterior-mean denoiser: (x + (1 - bar_alpha_t) s) / sqrt(bar_alpha_t).
Eigen::VectorXd tweedie_denoise(const DiffusionSchedule& schedule,
                                const Eigen::VectorXd& score,
                                const Eigen::VectorXd& x, int t);

Eigen::VectorXd tweedie_denoise(const NoiseLevel& level,
                                const Eigen::VectorXd& score,
                                const Eigen::VectorXd& x);

}  // namespace pcd
