#include <gtest/gtest.h>

#include <cmath>

#include "pcd/error.hpp"
#include "pcd/schedule.hpp"
#include "support.hpp"

namespace pcd {
namespace {

TEST(Schedule, SingleStep) {
  const auto s = make_linear_schedule(1, 0.1, 0.1);
  ASSERT_EQ(s.steps(), 1);
  EXPECT_DOUBLE_EQ(s.beta(1), 0.1);
  EXPECT_DOUBLE_EQ(s.bar_alpha(1), 0.9);
  EXPECT_EQ(s.posterior_variance(1), 0.0);
}

TEST(Schedule, ThreeStepProducts) {
  const auto s = make_linear_schedule(3, 0.1, 0.3);
  const double beta[] = {0.1, 0.2, 0.3};
  double prod = 1.0;
  for (int t = 1; t <= 3; ++t) {
    EXPECT_NEAR(s.beta(t), beta[t - 1], 1e-15);
    prod *= 1.0 - beta[t - 1];
    EXPECT_NEAR(s.bar_alpha(t), prod, 1e-15);
  }
  EXPECT_NEAR(s.bar_alpha(3), 0.504, 1e-15);
}

TEST(Schedule, PosteriorVarianceFormula) {
  const auto s = make_linear_schedule(10, 0.02, 0.4);
  for (int t = 2; t <= 10; ++t) {
    const double expected =
        (1.0 - s.bar_alpha(t - 1)) / (1.0 - s.bar_alpha(t)) * s.beta(t);
    EXPECT_NEAR(s.posterior_variance(t), expected, 1e-15);
  }
}

TEST(Schedule, BarAlphaStrictlyDecreasing) {
  test::Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const double lo = rng.uniform(1e-4, 0.2);
    const auto s = make_linear_schedule(rng.integer(2, 200), lo, rng.uniform(lo, 0.9));
    for (int t = 2; t <= s.steps(); ++t) EXPECT_LT(s.bar_alpha(t), s.bar_alpha(t - 1));
    EXPECT_LE(s.bar_alpha(1), 1.0);
    EXPECT_GT(s.bar_alpha(s.steps()), 0.0);
  }
}

TEST(Schedule, InvalidRangesRejected) {
  EXPECT_THROW(make_linear_schedule(0, 0.1, 0.2), Error);
  EXPECT_THROW(make_linear_schedule(5, 0.0, 0.2), Error);
  EXPECT_THROW(make_linear_schedule(5, 0.3, 0.2), Error);
  EXPECT_THROW(make_linear_schedule(5, 0.1, 1.0), Error);
  EXPECT_THROW(DiffusionSchedule({0.1, 1.5}), Error);
  EXPECT_THROW(DiffusionSchedule({}), Error);
}

TEST(Schedule, StepIndexValidated) {
  const auto s = make_linear_schedule(4, 0.1, 0.2);
  EXPECT_THROW(s.beta(0), Error);
  EXPECT_THROW(s.bar_alpha(5), Error);
  EXPECT_THROW(NoiseLevel::step(s, 0), Error);
  EXPECT_NO_THROW(NoiseLevel::step(s, 4));
}

TEST(NoiseLevel, DataAndStep) {
  const auto s = make_linear_schedule(4, 0.1, 0.2);
  EXPECT_TRUE(NoiseLevel::data().is_data());
  EXPECT_EQ(NoiseLevel::data().bar_alpha(), 1.0);
  const auto l = NoiseLevel::step(s, 2);
  EXPECT_FALSE(l.is_data());
  EXPECT_EQ(l.step_index(), 2);
  EXPECT_EQ(l.bar_alpha(), s.bar_alpha(2));
  EXPECT_NEAR(l.noise_variance(), 1.0 - s.bar_alpha(2), 1e-16);
  EXPECT_THROW(NoiseLevel::with_bar_alpha(0.0), Error);
}

TEST(Tweedie, IdentityAtZeroNoise) {
  const Eigen::VectorXd x = Eigen::Vector3d(1, -2, 3);
  const Eigen::VectorXd s = Eigen::Vector3d(5, 6, 7);
  EXPECT_TRUE(test::bitwise_equal(tweedie_denoise(NoiseLevel::with_bar_alpha(1.0), s, x), x));
}

TEST(Tweedie, QuarterLevel) {
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(1);
  EXPECT_DOUBLE_EQ(tweedie_denoise(NoiseLevel::with_bar_alpha(0.25), s, x)[0], 2.0);
}

// For x0 ~ N(m, v) and x_t = sqrt(ab) x0 + sqrt(1 - ab) eps the posterior mean
// is m + v sqrt(ab) (x_t - sqrt(ab) m) / (ab v + 1 - ab).
TEST(Tweedie, MatchesConjugatePosteriorMean) {
  const auto sched = make_linear_schedule(50, 1e-3, 0.2);
  test::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double m = rng.uniform(-3, 3), v = rng.uniform(0.1, 4);
    const int t = rng.integer(1, 50);
    const double ab = sched.bar_alpha(t);
    const double xt = rng.uniform(-5, 5);
    const double marg_var = ab * v + 1.0 - ab;
    const double score = -(xt - std::sqrt(ab) * m) / marg_var;
    const double expected = m + v * std::sqrt(ab) * (xt - std::sqrt(ab) * m) / marg_var;
    const Eigen::VectorXd out = tweedie_denoise(sched, Eigen::VectorXd::Constant(1, score),
                                                Eigen::VectorXd::Constant(1, xt), t);
    EXPECT_NEAR(out[0], expected, 1e-10 * (1 + std::abs(expected)));
  }
}

}  // namespace
}  // namespace pcd
