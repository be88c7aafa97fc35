#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcd/coupling.hpp"
#include "pcd/geometry.hpp"
#include "pcd/metrics.hpp"
#include "pcd/sampler.hpp"

namespace pcd {

enum class CouplingKind { None, LogBarrier, SquaredHinge, Dpp, Xor };

CouplingKind parse_coupling_kind(const std::string& name);
std::string to_string(CouplingKind kind);

// ---------------------------------------------------------------- corridor

/// Two blocks placed inside a 1-D corridor [0, length].
struct CorridorSpec {
  double length = 9.0;
  std::array<double, 2> block_lengths{6.0, 2.0};
  double center = 4.5;
  std::array<double, 2> prior_std{1.0, 1.5};

  /// Feasible interval for the center of block i: [L_i / 2, length - L_i / 2].
  std::pair<double, double> center_bounds(int block) const;
  /// Centers closer than (L_0 + L_1) / 2 overlap.
  double overlap_threshold() const;
  void validate() const;
};

struct CorridorOptions {
  bool projection = true;
  LmcSettings lmc{1e-2, 2000};
  double lb_alpha = 1.0;
  std::optional<AffineLogistic> classifier;  // xor coupling
  std::uint64_t seed = 0;
};

CoupledSystem build_corridor(const CorridorSpec& spec, CouplingKind kind, double gamma,
                             const CorridorOptions& options = {});

struct CorridorStats {
  double overlap_rate = 0.0;
  double violation_rate = 0.0;
};

int corridor_overlap(const CorridorSpec& spec, double x, double y);
int corridor_violation(const CorridorSpec& spec, double x, double y);
CorridorStats corridor_stats(const CorridorSpec& spec, const SampleBatch& batch);

struct CorridorSweep {
  double best_gamma = 0.0;
  std::vector<double> gammas;
  std::vector<CorridorStats> stats;
};

/// Picks the coupling strength with the lowest overlap rate among grid values
/// that keep violations at zero.
CorridorSweep corridor_gamma_sweep(const CorridorSpec& spec, CouplingKind kind,
                                   const std::vector<double>& grid, std::size_t batch,
                                   const CorridorOptions& options,
                                   const SamplerOptions& sampler = {});

inline const std::vector<double> kCorridorSweepGrid{1.0, 3.0, 10.0, 30.0, 100.0, 300.0};

// -------------------------------------------------------------- navigation

struct NavEnvironment {
  std::string name;
  double half_width = 12.0;  // workspace [-w, w]^2
  double robot_radius = 0.5;
  SignedDistanceField field;
  MotionPattern::Kind pattern = MotionPattern::Kind::TowardGoal;
  Point2 pattern_center = Point2::Zero();
  std::vector<double> v_max_presets;

  void validate() const;
  bool free(const Point2& p) const;
};

NavEnvironment make_empty_environment();
NavEnvironment make_highways_environment();
NavEnvironment make_environment(const std::string& name);

struct InitialConfiguration {
  std::vector<Point2> starts;
  std::vector<Point2> goals;

  std::size_t robots() const noexcept { return starts.size(); }
};

InitialConfiguration sample_initial_configuration(const NavEnvironment& env,
                                                  std::size_t robots,
                                                  std::uint64_t seed,
                                                  int max_attempts = 100000);

/// Two robots swapping ends of a random segment through the workspace center.
InitialConfiguration head_on_configuration(const NavEnvironment& env, std::uint64_t seed);

struct NavOptions {
  int horizon = 48;
  double dt = 1.0;
  double waypoint_std_max = 0.6;
  double waypoint_std_min = 0.05;
  bool projection = true;
  AdmmOptions admm{};
  double lambda_robo = 1.0;
  double obstacle_margin_factor = 3.0;  // r' = factor * R
  double shd_range_factor = 6.0;        // rho = factor * R
  double lb_offset_factor = 1.9;        // alpha = factor * R
  double dpp_eps = 1e-3;
  std::optional<AffineLogistic> classifier;
  std::optional<DiffusionSchedule> schedule;
  std::uint64_t seed = 0;
};

/// Linear 25-step schedule used for navigation sampling.
DiffusionSchedule default_nav_schedule();

/// Nominal path from start to goal: a straight line in Empty, a
/// counterclockwise arc about the pattern center in Highways.
Eigen::VectorXd nominal_path(const NavEnvironment& env, const Point2& start,
                             const Point2& goal, int horizon);

CoupledSystem build_nav_system(const NavEnvironment& env,
                               const InitialConfiguration& config, CouplingKind kind,
                               double gamma, double v_max, const NavOptions& options = {});

MotionPattern pattern_for(const NavEnvironment& env, const Point2& goal);

}  // namespace pcd
