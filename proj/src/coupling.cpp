#include "pcd/coupling.hpp"

#include <cmath>
#include <string>

#include "pcd/error.hpp"

namespace pcd {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_pair(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int point_dim) {
  require(point_dim >= 1, ErrorCode::InvalidArgument, "point_dim must be >= 1");
  if (x.size() != y.size())
    fail(ErrorCode::DimensionMismatch, "coupling: horizon mismatch (" +
                                           std::to_string(x.size()) + " vs " +
                                           std::to_string(y.size()) + ")");
  require(x.size() % point_dim == 0, ErrorCode::DimensionMismatch,
          "coupling: size not a multiple of point_dim");
}

// Accumulates f(r_h) over rows with r_h = ||X_h - Y_h||. `term` returns
// (value, dvalue/dr) and the tie-break at r = 0 zeroes the gradient.
template <typename Term>
CostValue distance_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        int point_dim, Term term) {
  check_pair(x, y, point_dim);
  CostValue out{0.0, {Eigen::VectorXd::Zero(x.size()), Eigen::VectorXd::Zero(y.size())}};
  const Eigen::Index rows = x.size() / point_dim;
  for (Eigen::Index h = 0; h < rows; ++h) {
    const auto diff = (x.segment(h * point_dim, point_dim) -
                       y.segment(h * point_dim, point_dim)).eval();
    const double r = diff.norm();
    const auto [v, dv] = term(r);
    out.value += v;
    if (r > 0.0 && dv != 0.0) {
      const Eigen::VectorXd g = (dv / r) * diff;
      out.grads[0].segment(h * point_dim, point_dim) += g;
      out.grads[1].segment(h * point_dim, point_dim) -= g;
    }
  }
  return out;
}

}  // namespace

CostValue lb_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                  double alpha, int point_dim) {
  require(alpha > 0.0, ErrorCode::InvalidArgument, "log-barrier alpha must be > 0");
  return distance_cost(x, y, point_dim, [alpha](double r) {
    return std::pair{-std::log(r + alpha), -1.0 / (r + alpha)};
  });
}

CostValue shd_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   double rho, int point_dim) {
  require(rho > 0.0, ErrorCode::InvalidArgument, "hinge range rho must be > 0");
  return distance_cost(x, y, point_dim, [rho](double r) {
    if (r > rho) return std::pair{0.0, 0.0};
    return std::pair{(r - rho) * (r - rho), 2.0 * (r - rho)};
  });
}

CostValue dpp_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double eps) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "dpp eps must be > 0");
  check_pair(x, y, 1);
  const double nx = x.norm();
  const double ny = y.norm();
  require(nx > 0.0 && ny > 0.0, ErrorCode::Domain, "dpp cost: zero-norm input");
  const double cosine = x.dot(y) / (nx * ny);
  const double arg = cosine + eps;
  require(arg > 0.0, ErrorCode::Domain, "dpp cost: cosine + eps is not positive");
  const double scale = -1.0 / arg;
  CostValue out;
  out.value = -std::log(arg);
  out.grads.push_back(scale * (y / (nx * ny) - cosine * x / (nx * nx)));
  out.grads.push_back(scale * (x / (nx * ny) - cosine * y / (ny * ny)));
  return out;
}

CostValue gaussian_likelihood_cost(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, double sigma) {
  require(sigma > 0.0, ErrorCode::InvalidArgument, "likelihood sigma must be > 0");
  check_pair(x, y, 1);
  const double s2 = sigma * sigma;
  const Eigen::VectorXd diff = x - y;
  CostValue out;
  out.value = 0.5 * diff.squaredNorm() / s2 +
              0.5 * static_cast<double>(x.size()) * (kLog2Pi + std::log(s2));
  out.grads.push_back(diff / s2);
  out.grads.push_back(-diff / s2);
  return out;
}

double AffineLogistic::probability(const Eigen::VectorXd& x) const {
  require(x.size() == weights.size(), ErrorCode::DimensionMismatch,
          "classifier: input dimension mismatch");
  const double z = weights.dot(x) + bias;
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

Eigen::VectorXd AffineLogistic::probability_gradient(const Eigen::VectorXd& x) const {
  const double p = probability(x);
  return p * (1.0 - p) * weights;
}

CostValue xor_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const AffineLogistic& classifier) {
  const double px = classifier.probability(x);
  const double py = classifier.probability(y);
  // Both classes contribute the same term since p(second|.) = 1 - p(first|.).
  CostValue out;
  out.value = -2.0 * (px * (1.0 - py) + py * (1.0 - px));
  out.grads.push_back(-2.0 * (1.0 - 2.0 * py) * classifier.probability_gradient(x));
  out.grads.push_back(-2.0 * (1.0 - 2.0 * px) * classifier.probability_gradient(y));
  return out;
}

CostValue obstacle_cost(std::span<const Eigen::VectorXd> xs,
                        const SignedDistanceField& field, double margin) {
  require(margin > 0.0, ErrorCode::InvalidArgument, "obstacle margin must be > 0");
  CostValue out;
  out.grads.reserve(xs.size());
  for (const auto& x : xs) {
    require(x.size() % 2 == 0, ErrorCode::DimensionMismatch,
            "obstacle cost expects planar trajectories");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    if (!field.empty()) {
      for (Eigen::Index h = 0; h < horizon(x); ++h) {
        const Point2 p = waypoint(x, h);
        const double phi = field.distance(p);
        if (phi <= margin) {
          out.value += margin - phi;
          g.segment<2>(2 * h) = -field.gradient(p);
        }
      }
    }
    out.grads.push_back(std::move(g));
  }
  return out;
}

CostValue pairwise_sum(const PairCost& base, std::span<const Eigen::VectorXd> xs) {
  require(xs.size() >= 2, ErrorCode::InvalidArgument,
          "pairwise sum needs at least two variables");
  if (xs.size() == 2) return base.evaluate_pair(xs[0], xs[1]);
  CostValue out;
  out.grads.reserve(xs.size());
  for (const auto& x : xs) out.grads.push_back(Eigen::VectorXd::Zero(x.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const CostValue c = base.evaluate_pair(xs[i], xs[j]);
      out.value += c.value;
      out.grads[i] += c.grads[0];
      out.grads[j] += c.grads[1];
    }
  }
  return out;
}

CostValue PairCost::evaluate(std::span<const Eigen::VectorXd> xs,
                             const NoiseLevel&) const {
  if (xs.size() != 2)
    fail(ErrorCode::InvalidArgument,
         "pair cost evaluated on " + std::to_string(xs.size()) + " variables");
  return evaluate_pair(xs[0], xs[1]);
}

LogBarrierCost::LogBarrierCost(double alpha, int point_dim)
    : alpha_(alpha), point_dim_(point_dim) {
  require(alpha > 0.0, ErrorCode::Configuration, "log-barrier alpha must be > 0");
}

CostValue LogBarrierCost::evaluate_pair(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y) const {
  return lb_cost(x, y, alpha_, point_dim_);
}

SquaredHingeCost::SquaredHingeCost(double rho, int point_dim)
    : rho_(rho), point_dim_(point_dim) {
  require(rho > 0.0, ErrorCode::Configuration, "hinge range rho must be > 0");
}

CostValue SquaredHingeCost::evaluate_pair(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y) const {
  return shd_cost(x, y, rho_, point_dim_);
}

DppCost::DppCost(double eps) : eps_(eps) {
  require(eps > 0.0, ErrorCode::Configuration, "dpp eps must be > 0");
}

CostValue DppCost::evaluate_pair(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) const {
  return dpp_cost(x, y, eps_);
}

XorCost::XorCost(AffineLogistic classifier) : classifier_(std::move(classifier)) {}

CostValue XorCost::evaluate_pair(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) const {
  return xor_cost(x, y, classifier_);
}

GaussianLikelihoodCost::GaussianLikelihoodCost(double sigma) : sigma_(sigma) {
  require(sigma > 0.0, ErrorCode::Configuration, "likelihood sigma must be > 0");
}

CostValue GaussianLikelihoodCost::evaluate_pair(const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& y) const {
  return gaussian_likelihood_cost(x, y, sigma_);
}

ObstacleCost::ObstacleCost(SignedDistanceField field, double margin)
    : field_(std::move(field)), margin_(margin) {
  require(margin > 0.0, ErrorCode::Configuration, "obstacle margin must be > 0");
}

CostValue ObstacleCost::evaluate(std::span<const Eigen::VectorXd> xs,
                                 const NoiseLevel&) const {
  return obstacle_cost(xs, field_, margin_);
}

PairwiseSumCost::PairwiseSumCost(PairCostPtr base) : base_(std::move(base)) {
  require(base_ != nullptr, ErrorCode::Configuration, "pairwise sum: null base cost");
}

CostValue PairwiseSumCost::evaluate(std::span<const Eigen::VectorXd> xs,
                                    const NoiseLevel&) const {
  // A single variable has no pairs.
  if (xs.size() == 1) return {0.0, {Eigen::VectorXd::Zero(xs[0].size())}};
  return pairwise_sum(*base_, xs);
}

WeightedSumCost::WeightedSumCost(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_)
    require(t.cost != nullptr, ErrorCode::Configuration, "weighted sum: null term");
}

CostValue WeightedSumCost::evaluate(std::span<const Eigen::VectorXd> xs,
                                    const NoiseLevel& level) const {
  CostValue out;
  out.grads.reserve(xs.size());
  for (const auto& x : xs) out.grads.push_back(Eigen::VectorXd::Zero(x.size()));
  for (const auto& [w, cost] : terms_) {
    if (w == 0.0) continue;
    const CostValue c = cost->evaluate(xs, level);
    out.value += w * c.value;
    for (std::size_t i = 0; i < xs.size(); ++i) out.grads[i] += w * c.grads[i];
  }
  return out;
}

PosteriorSamplingCost::PosteriorSamplingCost(CostPtr base,
                                             std::vector<ScoreModel> scores,
                                             bool stop_gradient)
    : base_(std::move(base)), scores_(std::move(scores)),
      stop_gradient_(stop_gradient) {
  require(base_ != nullptr, ErrorCode::Configuration, "ps_wrap: null base cost");
  require(!scores_.empty(), ErrorCode::Configuration, "ps_wrap: no score models");
}

CostValue PosteriorSamplingCost::evaluate(std::span<const Eigen::VectorXd> xs,
                                          const NoiseLevel& level) const {
  require(xs.size() == scores_.size(), ErrorCode::InvalidArgument,
          "ps cost: variable count does not match score models");
  std::vector<Eigen::VectorXd> denoised;
  denoised.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    denoised.push_back(tweedie_denoise(level, scores_[i].score(xs[i], level), xs[i]));
  CostValue out = base_->evaluate(denoised, NoiseLevel::data());
  const double ab = level.bar_alpha();
  if (stop_gradient_ || ab == 1.0) return out;
  // d xhat / d x = (I + (1 - ab) J_s) / sqrt(ab), J_s symmetric.
  const double inv_sqrt = 1.0 / std::sqrt(ab);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Eigen::VectorXd g = out.grads[i];
    out.grads[i] = inv_sqrt * (g + (1.0 - ab) *
                                       scores_[i].score_jacobian_product(xs[i], level, g));
  }
  return out;
}

CostPtr ps_wrap(CostPtr base, std::vector<ScoreModel> scores, bool stop_gradient) {
  return std::make_shared<PosteriorSamplingCost>(std::move(base), std::move(scores),
                                                 stop_gradient);
}

}  // namespace pcd
