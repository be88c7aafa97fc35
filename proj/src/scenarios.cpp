#include "pcd/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "pcd/error.hpp"
#include "pcd/random.hpp"

namespace pcd {

CouplingKind parse_coupling_kind(const std::string& name) {
  if (name == "none") return CouplingKind::None;
  if (name == "lb") return CouplingKind::LogBarrier;
  if (name == "shd") return CouplingKind::SquaredHinge;
  if (name == "dpp") return CouplingKind::Dpp;
  if (name == "xor") return CouplingKind::Xor;
  fail(ErrorCode::Configuration,
       "unknown coupling '" + name + "' (expected none, lb, shd, dpp or xor)");
}

std::string to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::None: return "none";
    case CouplingKind::LogBarrier: return "lb";
    case CouplingKind::SquaredHinge: return "shd";
    case CouplingKind::Dpp: return "dpp";
    case CouplingKind::Xor: return "xor";
  }
  return "none";
}

// ---------------------------------------------------------------- corridor

std::pair<double, double> CorridorSpec::center_bounds(int block) const {
  const double half = 0.5 * block_lengths.at(static_cast<std::size_t>(block));
  return {half, length - half};
}

double CorridorSpec::overlap_threshold() const {
  return 0.5 * (block_lengths[0] + block_lengths[1]);
}

void CorridorSpec::validate() const {
  require(length > 0.0, ErrorCode::Configuration, "corridor length must be > 0");
  for (int i = 0; i < 2; ++i) {
    require(block_lengths[i] > 0.0 && block_lengths[i] <= length,
            ErrorCode::Configuration, "block must fit inside the corridor");
    require(prior_std[i] > 0.0, ErrorCode::Configuration, "prior std must be > 0");
  }
}

CoupledSystem build_corridor(const CorridorSpec& spec, CouplingKind kind, double gamma,
                             const CorridorOptions& options) {
  spec.validate();
  CoupledSystem system;
  for (int i = 0; i < 2; ++i) {
    const auto [lo, hi] = spec.center_bounds(i);
    system.variables.push_back(
        {i == 0 ? "big" : "small",
         ScoreModel::isotropic_gaussian(Eigen::VectorXd::Constant(1, spec.center),
                                        spec.prior_std[i] * spec.prior_std[i]),
         options.projection
             ? ProjectionOperator::box(Eigen::VectorXd::Constant(1, lo),
                                       Eigen::VectorXd::Constant(1, hi))
             : ProjectionOperator::identity()});
  }
  switch (kind) {
    case CouplingKind::None:
      break;
    case CouplingKind::LogBarrier:
      system.cost = std::make_shared<LogBarrierCost>(options.lb_alpha, 1);
      break;
    case CouplingKind::SquaredHinge:
      system.cost = std::make_shared<SquaredHingeCost>(spec.overlap_threshold(), 1);
      break;
    case CouplingKind::Xor: {
      AffineLogistic cls = options.classifier.value_or(
          AffineLogistic{Eigen::VectorXd::Constant(1, 2.0), -2.0 * spec.center});
      require(cls.weights.size() == 1, ErrorCode::DimensionMismatch,
              "corridor classifier must act on scalar positions");
      system.cost = std::make_shared<XorCost>(std::move(cls));
      break;
    }
    case CouplingKind::Dpp:
      fail(ErrorCode::Configuration,
           "dpp coupling is undefined for scalar corridor positions");
  }
  system.gamma = kind == CouplingKind::None ? 0.0 : gamma;
  system.lmc = options.lmc;
  system.seed = options.seed;
  system.validate();
  return system;
}

int corridor_overlap(const CorridorSpec& spec, double x, double y) {
  return std::abs(x - y) < spec.overlap_threshold() ? 1 : 0;
}

int corridor_violation(const CorridorSpec& spec, double x, double y) {
  const auto [lx, hx] = spec.center_bounds(0);
  const auto [ly, hy] = spec.center_bounds(1);
  return (x < lx || x > hx || y < ly || y > hy) ? 1 : 0;
}

CorridorStats corridor_stats(const CorridorSpec& spec, const SampleBatch& batch) {
  CorridorStats stats;
  if (batch.batch_size == 0) return stats;
  for (std::size_t s = 0; s < batch.batch_size; ++s) {
    const double x = batch.samples[0][s][0];
    const double y = batch.samples[1][s][0];
    stats.overlap_rate += corridor_overlap(spec, x, y);
    stats.violation_rate += corridor_violation(spec, x, y);
  }
  const double n = static_cast<double>(batch.batch_size);
  stats.overlap_rate /= n;
  stats.violation_rate /= n;
  return stats;
}

CorridorSweep corridor_gamma_sweep(const CorridorSpec& spec, CouplingKind kind,
                                   const std::vector<double>& grid, std::size_t batch,
                                   const CorridorOptions& options,
                                   const SamplerOptions& sampler) {
  require(!grid.empty(), ErrorCode::Configuration, "empty coupling-strength grid");
  CorridorSweep sweep;
  sweep.gammas = grid;
  int best = -1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SampleBatch b = run_pcd_lmc(build_corridor(spec, kind, grid[i], options),
                                      batch, sampler);
    sweep.stats.push_back(corridor_stats(spec, b));
    const CorridorStats& s = sweep.stats.back();
    if (s.violation_rate > 0.0) continue;
    if (best < 0 || s.overlap_rate < sweep.stats[best].overlap_rate)
      best = static_cast<int>(i);
  }
  if (best < 0) {
    best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (sweep.stats[i].overlap_rate < sweep.stats[best].overlap_rate)
        best = static_cast<int>(i);
  }
  sweep.best_gamma = grid[best];
  return sweep;
}

// -------------------------------------------------------------- navigation

void NavEnvironment::validate() const {
  require(half_width > 0.0, ErrorCode::Configuration, "workspace must be non-empty");
  require(robot_radius > 0.0 && robot_radius < half_width, ErrorCode::Configuration,
          "robot radius must be in (0, half_width)");
}

bool NavEnvironment::free(const Point2& p) const {
  const double lim = half_width - robot_radius;
  if (std::abs(p.x()) > lim || std::abs(p.y()) > lim) return false;
  return field.distance(p) > robot_radius;
}

NavEnvironment make_empty_environment() {
  NavEnvironment env;
  env.name = "empty";
  env.pattern = MotionPattern::Kind::TowardGoal;
  env.v_max_presets = {0.703, 0.692, 0.675};
  return env;
}

NavEnvironment make_highways_environment() {
  NavEnvironment env;
  env.name = "highways";
  env.field = SignedDistanceField({Circle{Point2::Zero(), 4.0}});
  env.pattern = MotionPattern::Kind::CounterClockwise;
  env.pattern_center = Point2::Zero();
  env.v_max_presets = {0.878, 0.781, 0.647};
  return env;
}

NavEnvironment make_environment(const std::string& name) {
  if (name == "empty") return make_empty_environment();
  if (name == "highways") return make_highways_environment();
  fail(ErrorCode::Configuration,
       "unknown environment '" + name + "' (expected empty or highways)");
}

namespace {

bool separated(const std::vector<Point2>& placed, const Point2& p, double min_dist) {
  for (const auto& q : placed)
    if ((p - q).norm() <= min_dist) return false;
  return true;
}

Point2 draw_free_point(const NavEnvironment& env, CounterStream& rng,
                       const std::vector<Point2>& placed, int max_attempts,
                       const char* what) {
  const double lim = env.half_width - env.robot_radius;
  for (int a = 0; a < max_attempts; ++a) {
    const Point2 p{(2.0 * rng.uniform() - 1.0) * lim, (2.0 * rng.uniform() - 1.0) * lim};
    if (env.free(p) && separated(placed, p, 2.0 * env.robot_radius)) return p;
  }
  fail(ErrorCode::Crowded, std::string("could not place ") + what + " in environment '" +
                               env.name + "' after " + std::to_string(max_attempts) +
                               " attempts");
}

}  // namespace

InitialConfiguration sample_initial_configuration(const NavEnvironment& env,
                                                  std::size_t robots,
                                                  std::uint64_t seed,
                                                  int max_attempts) {
  env.validate();
  require(robots >= 1, ErrorCode::Configuration, "need at least one robot");
  require(max_attempts > 0, ErrorCode::InvalidArgument, "max_attempts must be > 0");
  CounterStream rng(seed, StreamDomain::Scenario, {0, 0, 0});
  InitialConfiguration config;
  for (std::size_t i = 0; i < robots; ++i)
    config.starts.push_back(draw_free_point(env, rng, config.starts, max_attempts, "start"));
  for (std::size_t i = 0; i < robots; ++i)
    config.goals.push_back(draw_free_point(env, rng, config.goals, max_attempts, "goal"));
  return config;
}

InitialConfiguration head_on_configuration(const NavEnvironment& env, std::uint64_t seed) {
  env.validate();
  CounterStream rng(seed, StreamDomain::Scenario, {0, 1, 0});
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  const double half = std::min(6.0 + 4.0 * rng.uniform(),
                               0.9 * (env.half_width - env.robot_radius));
  const Point2 a = half * Point2{std::cos(theta), std::sin(theta)};
  require(env.free(a) && env.free(-a) && env.field.empty(), ErrorCode::Configuration,
          "head-on configuration needs an obstacle-free environment");
  return {{a, -a}, {-a, a}};
}

DiffusionSchedule default_nav_schedule() { return make_linear_schedule(25, 0.01, 0.5); }

MotionPattern pattern_for(const NavEnvironment& env, const Point2& goal) {
  MotionPattern p;
  p.kind = env.pattern;
  p.goal = goal;
  p.center = env.pattern_center;
  return p;
}

Eigen::VectorXd nominal_path(const NavEnvironment& env, const Point2& start,
                             const Point2& goal, int horizon) {
  require(horizon >= 1, ErrorCode::Configuration, "horizon must be >= 1");
  Eigen::VectorXd path(2 * horizon);
  if (env.pattern == MotionPattern::Kind::TowardGoal) {
    for (int h = 1; h <= horizon; ++h)
      path.segment<2>(2 * (h - 1)) = start + (goal - start) * (double(h) / horizon);
    return path;
  }
  const Point2 s = start - env.pattern_center;
  const Point2 g = goal - env.pattern_center;
  const double rs = s.norm();
  const double rg = g.norm();
  const double ts = std::atan2(s.y(), s.x());
  double sweep = std::atan2(g.y(), g.x()) - ts;
  while (sweep < 0.0) sweep += 2.0 * std::numbers::pi;
  for (int h = 1; h <= horizon; ++h) {
    const double u = double(h) / horizon;
    const double r = rs + (rg - rs) * u;
    const double th = ts + sweep * u;
    path.segment<2>(2 * (h - 1)) =
        env.pattern_center + r * Point2{std::cos(th), std::sin(th)};
  }
  return path;
}

CoupledSystem build_nav_system(const NavEnvironment& env,
                               const InitialConfiguration& config, CouplingKind kind,
                               double gamma, double v_max, const NavOptions& options) {
  env.validate();
  require(config.robots() >= 1 && config.goals.size() == config.robots(),
          ErrorCode::Configuration, "configuration needs one goal per start");
  require(options.horizon >= 1, ErrorCode::Configuration, "horizon must be >= 1");
  require(v_max > 0.0 && options.dt > 0.0, ErrorCode::Configuration,
          "v_max and dt must be > 0");
  require(options.waypoint_std_min > 0.0 &&
              options.waypoint_std_max >= options.waypoint_std_min,
          ErrorCode::Configuration, "waypoint std range must be positive and ordered");
  for (std::size_t i = 0; i < config.robots(); ++i)
    require(env.free(config.starts[i]) && env.free(config.goals[i]), ErrorCode::Configuration,
            "robot " + std::to_string(i) + ": start or goal is not in free space");

  const int H = options.horizon;
  Eigen::VectorXd variance(H);
  for (int h = 1; h <= H; ++h) {
    const double sd = options.waypoint_std_min +
                      (options.waypoint_std_max - options.waypoint_std_min) *
                          std::sin(std::numbers::pi * h / H);
    variance[h - 1] = sd * sd;
  }

  CoupledSystem system;
  for (std::size_t i = 0; i < config.robots(); ++i) {
    ProjectionOperator proj;
    if (options.projection)
      proj = ProjectionOperator::velocity_chain(
          VelocityChainSet{config.starts[i], v_max, options.dt, options.admm});
    system.variables.push_back(
        {"robot" + std::to_string(i),
         ScoreModel::nominal_path(nominal_path(env, config.starts[i], config.goals[i], H),
                                  variance),
         std::move(proj)});
  }

  const double R = env.robot_radius;
  PairCostPtr base;
  switch (kind) {
    case CouplingKind::None:
      break;
    case CouplingKind::LogBarrier:
      base = std::make_shared<LogBarrierCost>(options.lb_offset_factor * R);
      break;
    case CouplingKind::SquaredHinge:
      base = std::make_shared<SquaredHingeCost>(options.shd_range_factor * R);
      break;
    case CouplingKind::Dpp:
      base = std::make_shared<DppCost>(options.dpp_eps);
      break;
    case CouplingKind::Xor: {
      AffineLogistic cls;
      if (options.classifier) {
        cls = *options.classifier;
      } else {
        cls.weights = Eigen::VectorXd::Zero(2 * H);
        for (int h = 0; h < H; ++h) cls.weights[2 * h] = 0.5 / H;
      }
      require(cls.weights.size() == 2 * H, ErrorCode::DimensionMismatch,
              "classifier weights must match the trajectory dimension");
      base = std::make_shared<XorCost>(std::move(cls));
      break;
    }
  }

  if (base && gamma > 0.0) {
    std::vector<WeightedSumCost::Term> terms;
    if (config.robots() >= 2)
      terms.push_back({options.lambda_robo, std::make_shared<PairwiseSumCost>(base)});
    if (!env.field.empty())
      terms.push_back({0.1 / gamma, std::make_shared<ObstacleCost>(
                                        env.field, options.obstacle_margin_factor * R)});
    if (!terms.empty()) system.cost = std::make_shared<WeightedSumCost>(std::move(terms));
  }
  system.gamma = system.cost ? gamma : 0.0;
  system.schedule = options.schedule ? *options.schedule : default_nav_schedule();
  system.seed = options.seed;
  system.validate();
  return system;
}

}  // namespace pcd
