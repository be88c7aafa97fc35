#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "pcd/coupling.hpp"
#include "pcd/error.hpp"
#include "support.hpp"

namespace pcd {
namespace {

using Vec = Eigen::VectorXd;

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }

// Checks every per-variable gradient of `cost` against central differences.
void expect_gradients(const CouplingCost& cost, std::vector<Vec> xs, const NoiseLevel& level,
                      double tol = 1e-5) {
  const CostValue c = cost.evaluate(xs, level);
  ASSERT_EQ(c.grads.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Vec fd = test::central_difference(
        [&](const Vec& xi) {
          std::vector<Vec> ys = xs;
          ys[i] = xi;
          return cost.evaluate(ys, level).value;
        },
        xs[i]);
    EXPECT_LE(test::relative_error(c.grads[i], fd), tol) << "variable " << i;
  }
}

// Rows with distance well away from 0 and from the hinge.
std::pair<Vec, Vec> separated_pair(test::Rng& rng, Eigen::Index rows, double rho) {
  for (;;) {
    Vec x = rng.normal_vector(2 * rows, 2.0), y = rng.normal_vector(2 * rows, 2.0);
    bool ok = true;
    for (Eigen::Index h = 0; h < rows; ++h) {
      const double r = (x.segment<2>(2 * h) - y.segment<2>(2 * h)).norm();
      ok = ok && r > 1e-2 && std::abs(r - rho) > 1e-2;
    }
    if (ok) return {x, y};
  }
}

AffineLogistic random_classifier(test::Rng& rng, Eigen::Index d) {
  return {rng.normal_vector(d, 0.5), rng.normal()};
}

TEST(LogBarrier, SingleRowValue) {
  const CostValue c = lb_cost(v2(0, 0), v2(1, 0), 0.5);
  EXPECT_NEAR(c.value, -std::log(1.5), 1e-15);
}

TEST(LogBarrier, CoincidentRowsHaveZeroGradient) {
  const Vec x = (Vec(4) << 1, 2, 3, 4).finished();
  const CostValue c = lb_cost(x, x, 1.0);
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.grads[0], Vec::Zero(4));
  EXPECT_EQ(c.grads[1], Vec::Zero(4));
}

TEST(LogBarrier, RejectsBadInput) {
  EXPECT_THROW(lb_cost(v2(0, 0), v2(1, 0), 0.0), Error);
  EXPECT_THROW(lb_cost(v2(0, 0), Vec::Zero(4), 1.0), Error);
}

TEST(SquaredHinge, SingleRowValue) {
  EXPECT_DOUBLE_EQ(shd_cost(v2(0, 0), v2(1, 0), 2.0).value, 1.0);
}

TEST(SquaredHinge, InactiveBeyondRange) {
  const CostValue c = shd_cost(v2(0, 0), v2(3, 4), 4.9);
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.grads[0], Vec::Zero(2));
  EXPECT_EQ(c.grads[1], Vec::Zero(2));
}

TEST(SquaredHinge, GradientJustInsideRange) {
  const SquaredHingeCost cost(2.0);
  expect_gradients(cost, {v2(0.1, 0.2), v2(1.9, 0.3)}, NoiseLevel::data());
}

TEST(Dpp, AlignedAndOrthogonal) {
  const Vec x = (Vec(4) << 1, 2, -1, 0.5).finished();
  EXPECT_NEAR(dpp_cost(x, x, 0.1).value, -std::log(1.1), 1e-14);
  const Vec y = (Vec(4) << 2, -1, 0, 0).finished();
  EXPECT_NEAR(dpp_cost(x, y, 1e-6).value, -std::log(1e-6), 1e-9);
}

TEST(Dpp, ScaleInvariance) {
  test::Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Vec x = rng.normal_vector(6), y = rng.normal_vector(6);
    const double a = rng.uniform(0.1, 10), b = rng.uniform(0.1, 10);
    const double base = dpp_cost(x, y, 2.0).value;
    EXPECT_NEAR(dpp_cost(a * x, b * y, 2.0).value, base, 1e-12 * (1 + std::abs(base)));
  }
}

TEST(Dpp, DegenerateInputRejected) {
  try {
    dpp_cost(Vec::Zero(4), Vec::Ones(4), 0.1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Domain);
  }
}

TEST(Xor, HandValues) {
  // A steep classifier drives probabilities to 0 or 1.
  const AffineLogistic cls{Vec::Constant(1, 1e3), 0.0};
  const Vec pos = Vec::Constant(1, 1.0), neg = Vec::Constant(1, -1.0);
  EXPECT_NEAR(xor_cost(pos, neg, cls).value, -2.0, 1e-12);
  EXPECT_NEAR(xor_cost(pos, pos, cls).value, 0.0, 1e-12);
  const Vec zero = Vec::Zero(1);
  EXPECT_DOUBLE_EQ(xor_cost(zero, zero, cls).value, -1.0);
}

TEST(Xor, MatchesTwoClassSum) {
  test::Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const AffineLogistic cls = random_classifier(rng, 3);
    const Vec x = rng.normal_vector(3), y = rng.normal_vector(3);
    const double px = cls.probability(x), py = cls.probability(y);
    const double qx = 1 - px, qy = 1 - py;
    const double expected = -((px * (1 - py) + py * (1 - px)) + (qx * (1 - qy) + qy * (1 - qx)));
    EXPECT_NEAR(xor_cost(x, y, cls).value, expected, 1e-14);
  }
}

TEST(Classifier, ProbabilitiesStayInOpenInterval) {
  const AffineLogistic cls{Vec::Constant(1, 1.0), 0.0};
  for (double z : {-30.0, -1.0, 0.0, 1.0, 30.0}) {
    const double p = cls.probability(Vec::Constant(1, z));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Obstacle, Values) {
  const SignedDistanceField field({Circle{{0, 0}, 1.0}});
  const std::vector<Vec> far{(Vec(4) << 5, 5, -5, 5).finished()};
  EXPECT_EQ(obstacle_cost(far, field, 1.0).value, 0.0);
  const std::vector<Vec> near{v2(1.5, 0)};
  const CostValue c = obstacle_cost(near, field, 1.0);
  EXPECT_DOUBLE_EQ(c.value, 0.5);
  EXPECT_TRUE(c.grads[0].isApprox(v2(-1, 0)));
}

TEST(Obstacle, EmptySceneContributesNothing) {
  const std::vector<Vec> xs{v2(0, 0), v2(1, 1)};
  const CostValue c = obstacle_cost(xs, SignedDistanceField{}, 1.0);
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.grads[1], Vec::Zero(2));
}

TEST(PairwiseSum, TwoVariablesEqualBaseBitwise) {
  test::Rng rng(6);
  const auto base = std::make_shared<SquaredHingeCost>(3.0);
  const PairwiseSumCost sum(base);
  const auto [x, y] = separated_pair(rng, 4, 3.0);
  const std::vector<Vec> xs{x, y};
  const CostValue a = sum.evaluate(xs);
  const CostValue b = base->evaluate_pair(x, y);
  EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
  EXPECT_TRUE(test::bitwise_equal(a.grads[0], b.grads[0]));
  EXPECT_TRUE(test::bitwise_equal(a.grads[1], b.grads[1]));
}

TEST(PairwiseSum, ThreeVariablesMatchExplicitSum) {
  test::Rng rng(7);
  const auto base = std::make_shared<LogBarrierCost>(0.5);
  const PairwiseSumCost sum(base);
  for (int i = 0; i < 10; ++i) {
    const std::vector<Vec> xs{rng.normal_vector(6), rng.normal_vector(6), rng.normal_vector(6)};
    const CostValue c01 = lb_cost(xs[0], xs[1], 0.5), c02 = lb_cost(xs[0], xs[2], 0.5),
                    c12 = lb_cost(xs[1], xs[2], 0.5);
    const CostValue c = sum.evaluate(xs);
    EXPECT_NEAR(c.value, c01.value + c02.value + c12.value, 1e-12);
    EXPECT_LE((c.grads[0] - (c01.grads[0] + c02.grads[0])).norm(), 1e-12);
    EXPECT_LE((c.grads[1] - (c01.grads[1] + c12.grads[0])).norm(), 1e-12);
    EXPECT_LE((c.grads[2] - (c02.grads[1] + c12.grads[1])).norm(), 1e-12);
  }
}

TEST(PairwiseSum, InactiveTripleIsZero) {
  const PairwiseSumCost sum(std::make_shared<SquaredHingeCost>(1.0));
  const std::vector<Vec> xs{v2(0, 0), v2(5, 0), v2(0, 5)};
  EXPECT_EQ(sum.evaluate(xs).value, 0.0);
}

TEST(PairwiseSum, SingleVariableHasNoPairs) {
  const PairwiseSumCost sum(std::make_shared<SquaredHingeCost>(1.0));
  const std::vector<Vec> xs{v2(0, 0)};
  const CostValue c = sum.evaluate(xs);
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.grads[0], Vec::Zero(2));
  EXPECT_THROW(pairwise_sum(SquaredHingeCost(1.0), xs), Error);
}

TEST(WeightedSum, IsLinearInTerms) {
  test::Rng rng(8);
  const auto lb = std::make_shared<LogBarrierCost>(1.0);
  const auto shd = std::make_shared<SquaredHingeCost>(4.0);
  const WeightedSumCost sum({{0.3, lb}, {2.0, shd}});
  const auto [x, y] = separated_pair(rng, 3, 4.0);
  const std::vector<Vec> xs{x, y};
  const CostValue c = sum.evaluate(xs);
  EXPECT_NEAR(c.value, 0.3 * lb->evaluate(xs).value + 2.0 * shd->evaluate(xs).value, 1e-12);
}

TEST(Symmetry, SwappingArgumentsSwapsGradients) {
  test::Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    const auto [x, y] = separated_pair(rng, 3, 2.5);
    const AffineLogistic cls = random_classifier(rng, 6);
    const std::vector<std::function<CostValue(const Vec&, const Vec&)>> costs{
        [](const Vec& a, const Vec& b) { return lb_cost(a, b, 0.7); },
        [](const Vec& a, const Vec& b) { return shd_cost(a, b, 2.5); },
        [](const Vec& a, const Vec& b) { return dpp_cost(a, b, 1.5); },
        [&](const Vec& a, const Vec& b) { return xor_cost(a, b, cls); }};
    for (const auto& f : costs) {
      const CostValue ab = f(x, y), ba = f(y, x);
      EXPECT_NEAR(ab.value, ba.value, 1e-12 * (1 + std::abs(ab.value)));
      EXPECT_LE((ab.grads[0] - ba.grads[1]).norm(), 1e-12 * (1 + ab.grads[0].norm()));
      EXPECT_LE((ab.grads[1] - ba.grads[0]).norm(), 1e-12 * (1 + ab.grads[1].norm()));
    }
  }
}

TEST(TranslationInvariance, LogBarrierAndHinge) {
  test::Rng rng(10);
  for (int i = 0; i < 20; ++i) {
    const auto [x, y] = separated_pair(rng, 4, 2.0);
    Vec shift(8);
    const Point2 s{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (int h = 0; h < 4; ++h) shift.segment<2>(2 * h) = s;
    for (auto f : {+[](const Vec& a, const Vec& b) { return lb_cost(a, b, 0.5); },
                   +[](const Vec& a, const Vec& b) { return shd_cost(a, b, 2.0); }}) {
      const CostValue c0 = f(x, y), c1 = f(x + shift, y + shift);
      EXPECT_NEAR(c0.value, c1.value, 1e-10);
      EXPECT_LE((c0.grads[0] - c1.grads[0]).norm(), 1e-9);
      EXPECT_LE((c0.grads[1] - c1.grads[1]).norm(), 1e-9);
    }
  }
}

// ----------------------------------------------------------- gradient suite

class GradientSuite : public ::testing::Test {
 protected:
  test::Rng rng{11};
  DiffusionSchedule sched = make_linear_schedule(20, 0.01, 0.3);
};

TEST_F(GradientSuite, PairCosts) {
  for (int i = 0; i < 20; ++i) {
    const auto [x, y] = separated_pair(rng, 4, 3.0);
    expect_gradients(LogBarrierCost(0.8), {x, y}, NoiseLevel::data());
    expect_gradients(SquaredHingeCost(3.0), {x, y}, NoiseLevel::data());
    expect_gradients(DppCost(1.2), {x, y}, NoiseLevel::data());
    expect_gradients(XorCost(random_classifier(rng, 8)), {x, y}, NoiseLevel::data());
    expect_gradients(GaussianLikelihoodCost(0.7), {x, y}, NoiseLevel::data());
  }
}

TEST_F(GradientSuite, ObstacleAwayFromKinks) {
  const SignedDistanceField field({Circle{{0, 0}, 1.0}, Circle{{4, 1}, 1.5}});
  const double margin = 1.0;
  int checked = 0;
  while (checked < 20) {
    const Vec x = rng.uniform_vector(8, -2, 6), y = rng.uniform_vector(8, -2, 6);
    bool ok = true;
    for (const Vec* t : {&x, &y})
      for (Eigen::Index h = 0; h < 4; ++h) {
        const Point2 p = waypoint(*t, h);
        const double d0 = (p - Point2(0, 0)).norm() - 1.0, d1 = (p - Point2(4, 1)).norm() - 1.5;
        ok = ok && std::abs(std::min(d0, d1) - margin) > 1e-3 && std::abs(d0 - d1) > 1e-3 &&
             (p - Point2(0, 0)).norm() > 1e-3 && (p - Point2(4, 1)).norm() > 1e-3;
      }
    if (!ok) continue;
    expect_gradients(ObstacleCost(field, margin), {x, y}, NoiseLevel::data());
    ++checked;
  }
}

TEST_F(GradientSuite, CompositeCosts) {
  const SignedDistanceField field({Circle{{0, 0}, 1.0}});
  for (int i = 0; i < 20; ++i) {
    const Vec a = rng.uniform_vector(6, 3, 8), b = rng.uniform_vector(6, 3, 8),
              c = rng.uniform_vector(6, 3, 8);
    const WeightedSumCost cost({{1.0, std::make_shared<PairwiseSumCost>(
                                          std::make_shared<LogBarrierCost>(0.9))},
                                {0.25, std::make_shared<ObstacleCost>(field, 1.0)}});
    expect_gradients(cost, {a, b, c}, NoiseLevel::data());
  }
}

TEST_F(GradientSuite, PosteriorSamplingWrappers) {
  for (int i = 0; i < 20; ++i) {
    const NoiseLevel level = NoiseLevel::step(sched, rng.integer(1, 20));
    const std::vector<ScoreModel> scores{
        ScoreModel::gaussian(rng.normal_vector(6), rng.uniform_vector(6, 0.3, 2.0)),
        ScoreModel::mixture({0.4, 0.6}, {{rng.normal_vector(6, 2.0), 0.5},
                                         {rng.normal_vector(6, 2.0), 1.2}})};
    const Vec x = rng.normal_vector(6, 2.0), y = rng.normal_vector(6, 2.0);
    const std::vector<CostPtr> bases{
        std::make_shared<LogBarrierCost>(0.8), std::make_shared<DppCost>(1.5),
        std::make_shared<XorCost>(random_classifier(rng, 6)),
        std::make_shared<GaussianLikelihoodCost>(1.0)};
    for (const auto& base : bases) expect_gradients(*ps_wrap(base, scores), {x, y}, level);
  }
}

TEST(PosteriorSampling, ZeroNoiseEqualsBase) {
  test::Rng rng(12);
  const auto base = std::make_shared<LogBarrierCost>(0.5);
  const std::vector<ScoreModel> scores{ScoreModel::standard_normal(4),
                                       ScoreModel::standard_normal(4)};
  const auto ps = ps_wrap(base, scores);
  const std::vector<Vec> xs{rng.normal_vector(4), rng.normal_vector(4)};
  const CostValue a = ps->evaluate(xs, NoiseLevel::with_bar_alpha(1.0));
  const CostValue b = base->evaluate(xs);
  EXPECT_EQ(a.value, b.value);
  EXPECT_TRUE(test::bitwise_equal(a.grads[0], b.grads[0]));
  EXPECT_TRUE(test::bitwise_equal(a.grads[1], b.grads[1]));
}

// Squared-distance base on Tweedie estimates equals the base at the
// conjugate-Gaussian posterior means.
TEST(PosteriorSampling, GaussianScoresGivePosteriorMeans) {
  test::Rng rng(13);
  const auto base = std::make_shared<GaussianLikelihoodCost>(1.0);
  for (int i = 0; i < 20; ++i) {
    const double ab = rng.uniform(0.05, 0.95);
    const NoiseLevel level = NoiseLevel::with_bar_alpha(ab);
    const Vec m1 = rng.normal_vector(3), m2 = rng.normal_vector(3);
    const double v1 = rng.uniform(0.2, 2), v2 = rng.uniform(0.2, 2);
    const std::vector<ScoreModel> scores{ScoreModel::isotropic_gaussian(m1, v1),
                                         ScoreModel::isotropic_gaussian(m2, v2)};
    const Vec x = rng.normal_vector(3), y = rng.normal_vector(3);
    auto post = [&](const Vec& m, double v, const Vec& xt) {
      return Vec(m + v * std::sqrt(ab) * (xt - std::sqrt(ab) * m) / (ab * v + 1 - ab));
    };
    const double expected = gaussian_likelihood_cost(post(m1, v1, x), post(m2, v2, y), 1.0).value;
    const std::vector<Vec> xs{x, y};
    EXPECT_NEAR(ps_wrap(base, scores)->evaluate(xs, level).value, expected,
                1e-10 * (1 + std::abs(expected)));
  }
}

TEST(PosteriorSampling, StopGradientReturnsDenoisedGradient) {
  const auto base = std::make_shared<GaussianLikelihoodCost>(1.0);
  const std::vector<ScoreModel> scores{ScoreModel::standard_normal(2),
                                       ScoreModel::standard_normal(2)};
  const NoiseLevel level = NoiseLevel::with_bar_alpha(0.25);
  const std::vector<Vec> xs{v2(1, 2), v2(-1, 0)};
  const CostValue c = ps_wrap(base, scores, true)->evaluate(xs, level);
  // For N(0, I) Tweedie gives sqrt(ab) x.
  const CostValue at_hat = base->evaluate_pair(0.5 * xs[0], 0.5 * xs[1]);
  EXPECT_TRUE(c.grads[0].isApprox(at_hat.grads[0]));
  EXPECT_TRUE(c.grads[1].isApprox(at_hat.grads[1]));
}

}  // namespace
}  // namespace pcd
