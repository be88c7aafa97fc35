#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pcd/geometry.hpp"
#include "pcd/schedule.hpp"
#include "pcd/score.hpp"

namespace pcd {

/// Cost value together with one gradient per coupled variable.
struct CostValue {
  double value = 0.0;
  std::vector<Eigen::VectorXd> grads;
};

/// Differentiable coupling cost c(x^1, ..., x^N). The noise level is only
/// read by time-dependent costs (the posterior-sampling wrapper).
class CouplingCost {
 public:
  virtual ~CouplingCost() = default;

  virtual CostValue evaluate(std::span<const Eigen::VectorXd> xs,
                             const NoiseLevel& level) const = 0;

  CostValue evaluate(std::span<const Eigen::VectorXd> xs) const {
    return evaluate(xs, NoiseLevel::data());
  }
};

using CostPtr = std::shared_ptr<const CouplingCost>;

/// Two-argument cost; evaluate() requires exactly two variables.
class PairCost : public CouplingCost {
 public:
  using CouplingCost::evaluate;
  CostValue evaluate(std::span<const Eigen::VectorXd> xs,
                     const NoiseLevel& level) const override;
  virtual CostValue evaluate_pair(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const = 0;
};

using PairCostPtr = std::shared_ptr<const PairCost>;

// Point sequences are flattened row-major with `point_dim` coordinates per
// row (2 for planar trajectories, 1 for scalar positions).

/// -sum_h log(||X_h - Y_h|| + alpha).
CostValue lb_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  double alpha, int point_dim = 2);
/// sum_h 1[r_h <= rho] (r_h - rho)^2 with r_h = ||X_h - Y_h||.
CostValue shd_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   double rho, int point_dim = 2);
/// -log(cos(angle(x, y)) + eps) on the flattened vectors.
CostValue dpp_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double eps);
/// ||x - y||^2 / (2 sigma^2) + (D/2) log(2 pi sigma^2): -log N(y; x, sigma^2 I).
CostValue gaussian_likelihood_cost(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, double sigma);

/// Two-class affine-logistic classifier: p(first | x) = sigmoid(w.x + b).
struct AffineLogistic {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double probability(const Eigen::VectorXd& x) const;
  /// Gradient of p(first | x).
  Eigen::VectorXd probability_gradient(const Eigen::VectorXd& x) const;
};

/// -sum_a [p(a|x)(1 - p(a|y)) + p(a|y)(1 - p(a|x))] over both classes.
CostValue xor_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const AffineLogistic& classifier);

/// sum_h sum_i 1[phi(X_h^i) <= margin] (margin - phi(X_h^i)).
CostValue obstacle_cost(std::span<const Eigen::VectorXd> xs,
                        const SignedDistanceField& field, double margin);

/// sum_{i<j} base(X^i, X^j).
CostValue pairwise_sum(const PairCost& base, std::span<const Eigen::VectorXd> xs);

class LogBarrierCost final : public PairCost {
 public:
  explicit LogBarrierCost(double alpha, int point_dim = 2);
  CostValue evaluate_pair(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) const override;

 private:
  double alpha_;
  int point_dim_;
};

class SquaredHingeCost final : public PairCost {
 public:
  explicit SquaredHingeCost(double rho, int point_dim = 2);
  CostValue evaluate_pair(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) const override;

 private:
  double rho_;
  int point_dim_;
};

class DppCost final : public PairCost {
 public:
  explicit DppCost(double eps);
  CostValue evaluate_pair(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) const override;

 private:
  double eps_;
};

class XorCost final : public PairCost {
 public:
  explicit XorCost(AffineLogistic classifier);
  CostValue evaluate_pair(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) const override;

 private:
  AffineLogistic classifier_;
};

class GaussianLikelihoodCost final : public PairCost {
 public:
  explicit GaussianLikelihoodCost(double sigma);
  CostValue evaluate_pair(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) const override;

 private:
  double sigma_;
};

class ObstacleCost final : public CouplingCost {
 public:
  ObstacleCost(SignedDistanceField field, double margin);
  using CouplingCost::evaluate;
  CostValue evaluate(std::span<const Eigen::VectorXd> xs,
                     const NoiseLevel& level) const override;

 private:
  SignedDistanceField field_;
  double margin_;
};

class PairwiseSumCost final : public CouplingCost {
 public:
  explicit PairwiseSumCost(PairCostPtr base);
  using CouplingCost::evaluate;
  CostValue evaluate(std::span<const Eigen::VectorXd> xs,
                     const NoiseLevel& level) const override;

 private:
  PairCostPtr base_;
};

class WeightedSumCost final : public CouplingCost {
 public:
  struct Term {
    double weight;
    CostPtr cost;
  };
  explicit WeightedSumCost(std::vector<Term> terms);
  using CouplingCost::evaluate;
  CostValue evaluate(std::span<const Eigen::VectorXd> xs,
                     const NoiseLevel& level) const override;

 private:
  std::vector<Term> terms_;
};

/// Posterior-sampling variant c_PS(x, t) = base(xhat_0(x^1), ..., xhat_0(x^N))
/// with Tweedie estimates from each variable's score. Gradients flow through
/// the denoiser unless `stop_gradient` is set, in which case the gradient with
/// respect to xhat_0 is returned unchanged.
class PosteriorSamplingCost final : public CouplingCost {
 public:
  PosteriorSamplingCost(CostPtr base, std::vector<ScoreModel> scores,
                        bool stop_gradient = false);
  using CouplingCost::evaluate;
  CostValue evaluate(std::span<const Eigen::VectorXd> xs,
                     const NoiseLevel& level) const override;

 private:
  CostPtr base_;
  std::vector<ScoreModel> scores_;
  bool stop_gradient_;
};

CostPtr ps_wrap(CostPtr base, std::vector<ScoreModel> scores,
                bool stop_gradient = false);

}  // namespace pcd
