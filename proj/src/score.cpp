#include "pcd/score.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "pcd/error.hpp"

namespace pcd {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

GaussianPrior as_gaussian(const NominalPathPrior& p) {
  const Eigen::Index h = p.waypoint_variance.size();
  Eigen::VectorXd var(2 * h);
  for (Eigen::Index i = 0; i < h; ++i) {
    var[2 * i] = p.waypoint_variance[i];
    var[2 * i + 1] = p.waypoint_variance[i];
  }
  return {p.nominal, std::move(var)};
}

double gaussian_log_density(const GaussianPrior& g, const Eigen::VectorXd& x) {
  const Eigen::ArrayXd d = (x - g.mean).array();
  const Eigen::ArrayXd v = g.variance.array();
  return -0.5 * ((d * d / v).sum() + v.log().sum() +
                 static_cast<double>(x.size()) * kLog2Pi);
}

struct MixtureTerms {
  std::vector<double> resp;          // posterior responsibilities
  std::vector<Eigen::VectorXd> grad; // per-component scores
  double log_norm = 0.0;             // log sum_i w_i N_i(x)
};

MixtureTerms mixture_terms(const GaussianMixturePrior& m,
                           const Eigen::VectorXd& x, const NoiseLevel& level) {
  const double ab = level.bar_alpha();
  const double sab = std::sqrt(ab);
  const double d = static_cast<double>(x.size());
  MixtureTerms out;
  std::vector<double> logs(m.components.size());
  out.grad.reserve(m.components.size());
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    const auto& c = m.components[i];
    const double v = ab * c.variance + (1.0 - ab);
    const Eigen::VectorXd diff = x - sab * c.mean;
    logs[i] = std::log(m.weights[i]) -
              0.5 * (diff.squaredNorm() / v + d * (std::log(v) + kLog2Pi));
    out.grad.push_back(-diff / v);
  }
  const double mx = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - mx);
  out.log_norm = mx + std::log(sum);
  out.resp.resize(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i)
    out.resp[i] = std::exp(logs[i] - out.log_norm);
  return out;
}

}  // namespace

GaussianPrior noised_gaussian(const GaussianPrior& prior, const NoiseLevel& level) {
  const double ab = level.bar_alpha();
  return {std::sqrt(ab) * prior.mean,
          (ab * prior.variance.array() + (1.0 - ab)).matrix()};
}

ScoreModel ScoreModel::gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance) {
  require(mean.size() > 0 && mean.size() == variance.size(),
          ErrorCode::DimensionMismatch, "gaussian: mean/variance size mismatch");
  require((variance.array() > 0.0).all(), ErrorCode::Configuration,
          "gaussian: variances must be positive");
  const Eigen::Index d = mean.size();
  return ScoreModel(GaussianPrior{std::move(mean), std::move(variance)}, d);
}

ScoreModel ScoreModel::isotropic_gaussian(Eigen::VectorXd mean, double variance) {
  Eigen::VectorXd var = Eigen::VectorXd::Constant(mean.size(), variance);
  return gaussian(std::move(mean), std::move(var));
}

ScoreModel ScoreModel::standard_normal(Eigen::Index dim) {
  return isotropic_gaussian(Eigen::VectorXd::Zero(dim), 1.0);
}

ScoreModel ScoreModel::mixture(std::vector<double> weights,
                               std::vector<IsotropicComponent> components) {
  require(!components.empty() && weights.size() == components.size(),
          ErrorCode::Configuration, "mixture: need one weight per component");
  const Eigen::Index d = components.front().mean.size();
  require(d > 0, ErrorCode::Configuration, "mixture: empty component mean");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(weights[i] > 0.0, ErrorCode::Configuration,
            "mixture: weights must be positive");
    require(components[i].mean.size() == d, ErrorCode::DimensionMismatch,
            "mixture: components differ in dimension");
    require(components[i].variance > 0.0, ErrorCode::Configuration,
            "mixture: component variance must be positive");
    total += weights[i];
  }
  require(std::abs(total - 1.0) < 1e-9, ErrorCode::Configuration,
          "mixture: weights must sum to 1");
  return ScoreModel(GaussianMixturePrior{std::move(weights), std::move(components)}, d);
}

ScoreModel ScoreModel::nominal_path(Eigen::VectorXd nominal,
                                    Eigen::VectorXd waypoint_variance) {
  require(waypoint_variance.size() > 0 &&
              nominal.size() == 2 * waypoint_variance.size(),
          ErrorCode::DimensionMismatch,
          "nominal path: expected H x 2 nominal and H variances");
  require((waypoint_variance.array() > 0.0).all(), ErrorCode::Configuration,
          "nominal path: variances must be positive");
  const Eigen::Index d = nominal.size();
  return ScoreModel(NominalPathPrior{std::move(nominal), std::move(waypoint_variance)}, d);
}

void ScoreModel::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != dim_)
    fail(ErrorCode::DimensionMismatch, "score model expects dimension " +
                                           std::to_string(dim_) + ", got " +
                                           std::to_string(x.size()));
}

Eigen::VectorXd ScoreModel::score(const Eigen::VectorXd& x,
                                  const NoiseLevel& level) const {
  check_dim(x);
  return std::visit(
      [&](const auto& k) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianMixturePrior>) {
          const MixtureTerms m = mixture_terms(k, x, level);
          Eigen::VectorXd s = Eigen::VectorXd::Zero(x.size());
          for (std::size_t i = 0; i < m.resp.size(); ++i) s += m.resp[i] * m.grad[i];
          return s;
        } else if constexpr (std::is_same_v<T, NominalPathPrior>) {
          const GaussianPrior g = noised_gaussian(as_gaussian(k), level);
          return ((g.mean - x).array() / g.variance.array()).matrix();
        } else {
          // Same arithmetic as noised_gaussian, without the temporaries.
          const double ab = level.bar_alpha();
          return ((std::sqrt(ab) * k.mean - x).array() /
                  (ab * k.variance.array() + (1.0 - ab)))
              .matrix();
        }
      },
      kind_);
}

double ScoreModel::log_density(const Eigen::VectorXd& x,
                               const NoiseLevel& level) const {
  check_dim(x);
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianMixturePrior>) {
          return mixture_terms(k, x, level).log_norm;
        } else if constexpr (std::is_same_v<T, NominalPathPrior>) {
          return gaussian_log_density(noised_gaussian(as_gaussian(k), level), x);
        } else {
          return gaussian_log_density(noised_gaussian(k, level), x);
        }
      },
      kind_);
}

Eigen::VectorXd ScoreModel::score_jacobian_product(const Eigen::VectorXd& x,
                                                   const NoiseLevel& level,
                                                   const Eigen::VectorXd& v) const {
  check_dim(x);
  check_dim(v);
  return std::visit(
      [&](const auto& k) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianMixturePrior>) {
          // H = sum_i r_i (-I / v_i) + sum_i r_i g_i g_i^T - gbar gbar^T
          const MixtureTerms m = mixture_terms(k, x, level);
          const double ab = level.bar_alpha();
          Eigen::VectorXd gbar = Eigen::VectorXd::Zero(x.size());
          Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
          for (std::size_t i = 0; i < m.resp.size(); ++i) {
            const double var = ab * k.components[i].variance + (1.0 - ab);
            out += m.resp[i] * (-v / var + m.grad[i] * m.grad[i].dot(v));
            gbar += m.resp[i] * m.grad[i];
          }
          out -= gbar * gbar.dot(v);
          return out;
        } else {
          GaussianPrior g;
          if constexpr (std::is_same_v<T, NominalPathPrior>) {
            g = noised_gaussian(as_gaussian(k), level);
          } else {
            g = noised_gaussian(k, level);
          }
          return (-v.array() / g.variance.array()).matrix();
        }
      },
      kind_);
}

}  // namespace pcd
