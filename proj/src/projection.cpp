#include "pcd/projection.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "pcd/error.hpp"

namespace pcd {
namespace {

using Mat2 = Eigen::MatrixX2d;

Mat2 as_rows(const Eigen::VectorXd& traj) {
  require(traj.size() > 0 && traj.size() % 2 == 0, ErrorCode::DimensionMismatch,
          "velocity chain expects a non-empty H x 2 trajectory");
  const Eigen::Index h = traj.size() / 2;
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>>(
      traj.data(), h, 2);
}

Eigen::VectorXd flatten(const Mat2& m) {
  Eigen::VectorXd out(m.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>>(
      out.data(), m.rows(), 2) = m;
  return out;
}

// A X - b: first row X_1 - x0, then consecutive displacements.
Mat2 displacements(const Mat2& x, const Point2& start) {
  Mat2 d(x.rows(), 2);
  d.row(0) = x.row(0) - start.transpose();
  if (x.rows() > 1)
    d.bottomRows(x.rows() - 1) = x.bottomRows(x.rows() - 1) - x.topRows(x.rows() - 1);
  return d;
}

// A^T W: row h gets W_h - W_{h+1}.
Mat2 apply_at(const Mat2& w) {
  Mat2 out = w;
  if (w.rows() > 1) out.topRows(w.rows() - 1) -= w.bottomRows(w.rows() - 1);
  return out;
}

void clip_rows(Mat2& w, double limit) {
  for (Eigen::Index h = 0; h < w.rows(); ++h) {
    const double n = w.row(h).norm();
    if (n > limit) w.row(h) *= limit / n;
  }
}

// Forward pass that rescales any displacement exceeding the limit; used on
// converged ADMM iterates to remove residual-sized violations.
void enforce_chain(Mat2& x, const Point2& start, double limit) {
  Eigen::RowVector2d prev = start.transpose();
  for (Eigen::Index h = 0; h < x.rows(); ++h) {
    Eigen::RowVector2d d = x.row(h) - prev;
    const double n = d.norm();
    if (n > limit) {
      d *= limit / n;
      x.row(h) = prev + d;
    }
    prev = x.row(h);
  }
}

void check_chain(const VelocityChainSet& s) {
  require(s.v_max > 0.0 && s.dt > 0.0, ErrorCode::Configuration,
          "velocity chain needs v_max > 0 and dt > 0");
  require(s.admm.penalty > 0.0, ErrorCode::Configuration, "ADMM penalty must be > 0");
  require(s.admm.max_iterations >= 1, ErrorCode::Configuration,
          "ADMM max_iterations must be >= 1");
  require(s.admm.tolerance >= 0.0, ErrorCode::Configuration,
          "ADMM tolerance must be >= 0");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

ChainSystemFactor::ChainSystemFactor(Eigen::Index horizon, double penalty)
    : diag_(horizon), lower_(horizon > 1 ? horizon - 1 : 0) {
  require(horizon >= 1, ErrorCode::InvalidArgument, "velocity chain horizon must be >= 1");
  require(penalty > 0.0, ErrorCode::Configuration, "ADMM penalty must be > 0");
  // M = 2 I + xi A^T A: diagonal 2 + 2 xi (last entry 2 + xi), off-diagonal -xi.
  double prev_lower = 0.0;
  for (Eigen::Index i = 0; i < horizon; ++i) {
    const double m_ii = 2.0 + (i + 1 < horizon ? 2.0 : 1.0) * penalty;
    diag_[i] = std::sqrt(m_ii - prev_lower * prev_lower);
    if (i + 1 < horizon) {
      lower_[i] = -penalty / diag_[i];
      prev_lower = lower_[i];
    }
  }
}

void ChainSystemFactor::solve_in_place(Eigen::Ref<Eigen::MatrixX2d> v) const {
  const Eigen::Index n = diag_.size();
  require(v.rows() == n, ErrorCode::DimensionMismatch, "chain factor: size mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) v.row(i) -= lower_[i - 1] * v.row(i - 1);
    v.row(i) /= diag_[i];
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (i + 1 < n) v.row(i) -= lower_[i] * v.row(i + 1);
    v.row(i) /= diag_[i];
  }
}

std::shared_ptr<const ChainSystemFactor> chain_factor(Eigen::Index horizon,
                                                      double penalty) {
  static std::mutex mu;
  static std::map<std::pair<Eigen::Index, double>,
                  std::shared_ptr<const ChainSystemFactor>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{horizon, penalty}];
  if (!slot) slot = std::make_shared<const ChainSystemFactor>(horizon, penalty);
  return slot;
}

ChainBatchProjection project_velocity_chain_batch(
    const VelocityChainSet& set, std::span<const Eigen::VectorXd> x_hats) {
  check_chain(set);
  ChainBatchProjection out;
  if (x_hats.empty()) return out;

  const Eigen::Index h = x_hats.front().size() / 2;
  const auto factor = chain_factor(h, set.admm.penalty);
  const double xi = set.admm.penalty;
  const double limit = set.step_limit();
  const std::size_t batch = x_hats.size();

  std::vector<Mat2> target, x, z, dual;
  target.reserve(batch);
  for (const auto& xh : x_hats) {
    require(xh.size() == 2 * h, ErrorCode::DimensionMismatch,
            "velocity chain batch: trajectories differ in horizon");
    target.push_back(as_rows(xh));
  }
  x.resize(batch);
  dual.assign(batch, Mat2::Zero(h, 2));
  // Warm start: the input's own (clipped) displacements.
  z.reserve(batch);
  for (const auto& t : target) {
    Mat2 d = displacements(t, set.start);
    clip_rows(d, limit);
    z.push_back(std::move(d));
  }

  Mat2 b = Mat2::Zero(h, 2);
  b.row(0) = set.start.transpose();

  double r_max = 0.0;
  int k = 0;
  bool converged = false;
  while (k < set.admm.max_iterations) {
    ++k;
    r_max = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      Mat2 v = 2.0 * target[i] + xi * apply_at(z[i] + b - dual[i] / xi);
      factor->solve_in_place(v);
      x[i] = std::move(v);
      const Mat2 ax_b = displacements(x[i], set.start);
      Mat2 w = ax_b + dual[i] / xi;
      clip_rows(w, limit);
      z[i] = std::move(w);
      const Mat2 residual = ax_b - z[i];
      dual[i] += xi * residual;
      r_max = std::max(r_max, residual.norm());
    }
    if (r_max <= set.admm.tolerance) {
      converged = true;
      break;
    }
  }

  out.trajectories.reserve(batch);
  for (auto& xi_traj : x) {
    if (converged) enforce_chain(xi_traj, set.start, limit);
    out.trajectories.push_back(flatten(xi_traj));
  }
  out.info = {converged, k, r_max};
  return out;
}

ChainProjection project_velocity_chain(const VelocityChainSet& set,
                                       const Eigen::VectorXd& x_hat) {
  auto batch = project_velocity_chain_batch(set, std::span(&x_hat, 1));
  return {std::move(batch.trajectories.front()), batch.info};
}

double velocity_violation(const VelocityChainSet& set, const Eigen::VectorXd& traj) {
  const Mat2 d = displacements(as_rows(traj), set.start);
  double worst = 0.0;
  for (Eigen::Index h = 0; h < d.rows(); ++h)
    worst = std::max(worst, d.row(h).norm() - set.step_limit());
  return worst;
}

HullProjection project_convex_hull(const ConvexHullSet& set, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd& e = set.exemplars;
  require(e.cols() >= 1, ErrorCode::Configuration, "convex hull needs at least one exemplar");
  require(e.rows() == x.size(), ErrorCode::DimensionMismatch,
          "convex hull: exemplar dimension differs from input");
  require(set.learning_rate > 0.0, ErrorCode::Configuration,
          "mirror descent learning rate must be > 0");
  require(set.iterations >= 0, ErrorCode::Configuration,
          "mirror descent iterations must be >= 0");

  const Eigen::Index m = e.cols();
  const Eigen::MatrixXd gram = e.transpose() * e;
  const Eigen::VectorXd b = e.transpose() * x;
  Eigen::VectorXd lambda = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd log_lambda = lambda.array().log().matrix();

  int k = 0;
  for (; k < set.iterations; ++k) {
    const Eigen::VectorXd grad = 2.0 * (gram * lambda - b);
    log_lambda -= set.learning_rate * grad;
    log_lambda.array() -= log_lambda.maxCoeff();
    Eigen::VectorXd next = log_lambda.array().exp().matrix();
    next /= next.sum();
    log_lambda = next.array().log().matrix();
    const double change = (next - lambda).cwiseAbs().maxCoeff();
    lambda = std::move(next);
    if (change < set.early_exit) {
      ++k;
      break;
    }
  }
  return {e * lambda, lambda, k};
}

ProjectionOperator ProjectionOperator::singleton(Eigen::VectorXd point) {
  require(point.size() > 0, ErrorCode::Configuration, "singleton: empty point");
  return ProjectionOperator(SingletonSet{std::move(point)});
}

ProjectionOperator ProjectionOperator::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  require(lower.size() > 0 && lower.size() == upper.size(), ErrorCode::Configuration,
          "box: bound sizes differ");
  require((lower.array() <= upper.array()).all(), ErrorCode::Configuration,
          "box: empty set (lower > upper)");
  return ProjectionOperator(BoxSet{std::move(lower), std::move(upper)});
}

ProjectionOperator ProjectionOperator::ball(Eigen::VectorXd center, double radius) {
  require(center.size() > 0, ErrorCode::Configuration, "ball: empty center");
  require(radius >= 0.0, ErrorCode::Configuration, "ball: negative radius");
  return ProjectionOperator(BallSet{std::move(center), radius});
}

ProjectionOperator ProjectionOperator::velocity_chain(VelocityChainSet set) {
  check_chain(set);
  return ProjectionOperator(std::move(set));
}

ProjectionOperator ProjectionOperator::convex_hull(ConvexHullSet set) {
  require(set.exemplars.cols() >= 1, ErrorCode::Configuration,
          "convex hull needs at least one exemplar");
  return ProjectionOperator(std::move(set));
}

Eigen::Index ProjectionOperator::required_dim() const noexcept {
  return std::visit(
      overloaded{[](const IdentitySet&) -> Eigen::Index { return -1; },
                 [](const SingletonSet& s) { return s.point.size(); },
                 [](const BoxSet& s) { return s.lower.size(); },
                 [](const BallSet& s) { return s.center.size(); },
                 [](const VelocityChainSet&) -> Eigen::Index { return -1; },
                 [](const ConvexHullSet& s) { return s.exemplars.rows(); }},
      kind_);
}

Eigen::VectorXd ProjectionOperator::project(const Eigen::VectorXd& x,
                                            ProjectionInfo* info) const {
  const Eigen::Index need = required_dim();
  if (need >= 0 && need != x.size())
    fail(ErrorCode::DimensionMismatch, "projection expects dimension " +
                                           std::to_string(need) + ", got " +
                                           std::to_string(x.size()));
  if (info) *info = ProjectionInfo{};
  return std::visit(
      overloaded{
          [&](const IdentitySet&) -> Eigen::VectorXd { return x; },
          [&](const SingletonSet& s) -> Eigen::VectorXd { return s.point; },
          [&](const BoxSet& s) -> Eigen::VectorXd {
            return x.cwiseMax(s.lower).cwiseMin(s.upper);
          },
          [&](const BallSet& s) -> Eigen::VectorXd {
            const Eigen::VectorXd d = x - s.center;
            const double n = d.norm();
            if (n <= s.radius) return x;
            return s.center + (s.radius / n) * d;
          },
          [&](const VelocityChainSet& s) -> Eigen::VectorXd {
            ChainProjection p = project_velocity_chain(s, x);
            if (info) *info = p.info;
            return std::move(p.trajectory);
          },
          [&](const ConvexHullSet& s) -> Eigen::VectorXd {
            HullProjection p = project_convex_hull(s, x);
            if (info) info->iterations = p.iterations;
            return std::move(p.point);
          }},
      kind_);
}

}  // namespace pcd
