#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcd/coupling.hpp"
#include "pcd/projection.hpp"
#include "pcd/schedule.hpp"
#include "pcd/score.hpp"

namespace pcd {

struct CoupledVariable {
  std::string name;
  ScoreModel score;
  ProjectionOperator projection;
};

struct LmcSettings {
  double step_size = 1e-3;  // delta
  int iterations = 1000;    // T
};

/// N variables with independent scores, joined by a coupling cost and each
/// constrained by its own projection.
struct CoupledSystem {
  std::vector<CoupledVariable> variables;
  CostPtr cost;  // null means uncoupled
  double gamma = 0.0;
  std::optional<DiffusionSchedule> schedule;  // DDPM / DPS
  std::optional<LmcSettings> lmc;             // LMC
  double noise_scale_k = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool coupled() const noexcept { return cost != nullptr && gamma != 0.0; }
};

struct SamplerOptions {
  unsigned workers = 0;       // 0 picks hardware concurrency
  bool inject_noise = true;   // test hook: false suppresses every noise draw
};

struct RngLineage {
  std::uint64_t seed = 0;
  std::string scheme;
};

struct SampleBatch {
  std::size_t batch_size = 0;
  /// samples[variable][sample]
  std::vector<std::vector<Eigen::VectorXd>> samples;
  /// 1 when every projection of the sample converged.
  std::vector<std::uint8_t> converged;
  std::vector<std::uint32_t> nonconverged_projections;
  std::uint64_t projection_calls = 0;
  RngLineage lineage;
};

/// Stream layout: sample index, variable index, and step (0 = initial draw).
inline constexpr const char* kStreamScheme =
    "philox4x32-10/domain=sampler/counter=(block,step,variable,sample)";

/// One projected-coupled Langevin move before projection:
///   x + delta s - gamma delta grad + sqrt(2 delta) eps.
/// An empty `coupling_grad` skips the coupling term.
Eigen::VectorXd lmc_update(const Eigen::VectorXd& x, const Eigen::VectorXd& score,
                           const Eigen::VectorXd* coupling_grad, double gamma,
                           double delta, const Eigen::VectorXd* noise);

/// Reverse DDPM move from step t:
///   (x + beta_t s) / sqrt(alpha_t) + k sqrt(beta_t) eps, no noise at t = 1.
Eigen::VectorXd ddpm_update(const DiffusionSchedule& schedule, int t,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& score,
                            double noise_scale_k, const Eigen::VectorXd* noise);

SampleBatch run_pcd_lmc(const CoupledSystem& system, std::size_t batch,
                        const SamplerOptions& options = {});
SampleBatch run_pcd_ddpm(const CoupledSystem& system, std::size_t batch,
                         const SamplerOptions& options = {});
/// DDPM loop whose coupling gradient is taken through Tweedie estimates.
SampleBatch run_pcd_dps(const CoupledSystem& system, std::size_t batch,
                        const SamplerOptions& options = {},
                        bool stop_gradient = false);

/// Classifier guidance as PCD: X free, Y pinned to y0, cost -log N(y0; x, sigma^2).
struct GuidanceProblem {
  ScoreModel prior;
  double likelihood_sigma = 1.0;
  Eigen::VectorXd y0;
  double gamma = 1.0;
  LmcSettings lmc;
  std::uint64_t seed = 0;
};

SampleBatch run_cg_reduction(const GuidanceProblem& problem, std::size_t batch,
                             const SamplerOptions& options = {});

}  // namespace pcd
