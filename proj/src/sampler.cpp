#include "pcd/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "pcd/error.hpp"
#include "pcd/random.hpp"

namespace pcd {
namespace {

unsigned resolve_workers(unsigned requested, std::size_t batch) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency())
                              : requested;
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(batch, 1)));
}

// Runs body(sample) for every sample; contiguous chunks per worker. Samples
// share nothing, so results do not depend on the worker count.
template <class Body>
void for_each_sample(std::size_t batch, unsigned workers, Body&& body) {
  const unsigned w = resolve_workers(workers, batch);
  if (w <= 1) {
    for (std::size_t s = 0; s < batch; ++s) body(s);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  {
    std::vector<std::jthread> threads;
    threads.reserve(w);
    const std::size_t chunk = (batch + w - 1) / w;
    for (unsigned i = 0; i < w; ++i) {
      const std::size_t lo = i * chunk;
      const std::size_t hi = std::min(batch, lo + chunk);
      threads.emplace_back([&, i, lo, hi] {
        try {
          for (std::size_t s = lo; s < hi; ++s) body(s);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SampleBatch make_batch(const CoupledSystem& system, std::size_t batch) {
  SampleBatch out;
  out.batch_size = batch;
  out.samples.assign(system.variables.size(),
                     std::vector<Eigen::VectorXd>(batch));
  out.converged.assign(batch, 1);
  out.nonconverged_projections.assign(batch, 0);
  out.lineage = {system.seed, kStreamScheme};
  return out;
}

Eigen::VectorXd draw(const CoupledSystem& system, std::size_t sample,
                     std::size_t variable, std::uint32_t step) {
  return normal_vector(system.seed, StreamDomain::Sampler,
                       {static_cast<std::uint32_t>(sample),
                        static_cast<std::uint32_t>(variable), step},
                       system.variables[variable].score.dim());
}

struct ProjectionTally {
  std::uint64_t calls = 0;
  std::uint32_t nonconverged = 0;
};

void project_into(const CoupledVariable& v, Eigen::VectorXd& x, ProjectionTally& tally) {
  if (v.projection.is_identity()) return;
  ProjectionInfo info;
  x = v.projection.project(x, &info);
  ++tally.calls;
  if (!info.converged) ++tally.nonconverged;
}

void finish_sample(SampleBatch& out, std::size_t s, std::vector<Eigen::VectorXd>& xs,
                   const ProjectionTally& tally, std::vector<std::uint64_t>& calls) {
  for (std::size_t v = 0; v < xs.size(); ++v) out.samples[v][s] = std::move(xs[v]);
  out.nonconverged_projections[s] = tally.nonconverged;
  out.converged[s] = tally.nonconverged == 0 ? 1 : 0;
  calls[s] = tally.calls;
}

std::uint64_t total(const std::vector<std::uint64_t>& calls) {
  std::uint64_t sum = 0;
  for (auto c : calls) sum += c;
  return sum;
}

SampleBatch run_ddpm_loop(const CoupledSystem& system, std::size_t batch,
                          const SamplerOptions& options, const CostPtr& cost) {
  require(system.schedule.has_value(), ErrorCode::Configuration,
          "DDPM sampling needs a diffusion schedule");
  const DiffusionSchedule& schedule = *system.schedule;
  const bool coupled = cost != nullptr && system.gamma != 0.0;
  const std::size_t n = system.variables.size();
  SampleBatch out = make_batch(system, batch);
  std::vector<std::uint64_t> calls(batch, 0);

  for_each_sample(batch, options.workers, [&](std::size_t s) {
    std::vector<Eigen::VectorXd> xs(n);
    for (std::size_t v = 0; v < n; ++v) xs[v] = draw(system, s, v, 0);
    ProjectionTally tally;
    std::vector<Eigen::VectorXd> next(n);
    for (int t = schedule.steps(); t >= 1; --t) {
      const NoiseLevel level = NoiseLevel::step(schedule, t);
      CostValue c;
      if (coupled) c = cost->evaluate(xs, level);
      for (std::size_t v = 0; v < n; ++v) {
        const CoupledVariable& var = system.variables[v];
        const Eigen::VectorXd score = var.score.score(xs[v], level);
        Eigen::VectorXd eps;
        const bool noisy = options.inject_noise && t > 1;
        if (noisy) eps = draw(system, s, v, static_cast<std::uint32_t>(t));
        next[v] = ddpm_update(schedule, t, xs[v], score, system.noise_scale_k,
                              noisy ? &eps : nullptr);
        if (coupled) next[v] -= system.gamma * c.grads[v];
        project_into(var, next[v], tally);
      }
      std::swap(xs, next);
    }
    finish_sample(out, s, xs, tally, calls);
  });
  out.projection_calls = total(calls);
  return out;
}

std::vector<ScoreModel> scores_of(const CoupledSystem& system) {
  std::vector<ScoreModel> scores;
  scores.reserve(system.variables.size());
  for (const auto& v : system.variables) scores.push_back(v.score);
  return scores;
}

}  // namespace

void CoupledSystem::validate() const {
  require(!variables.empty(), ErrorCode::Configuration, "system has no variables");
  require(gamma >= 0.0, ErrorCode::Configuration, "coupling strength must be >= 0");
  require(noise_scale_k >= 1.0, ErrorCode::Configuration, "noise scale k must be >= 1");
  if (lmc) {
    require(lmc->step_size > 0.0, ErrorCode::Configuration, "LMC step size must be > 0");
    require(lmc->iterations >= 0, ErrorCode::Configuration,
            "LMC iterations must be >= 0");
  }
  for (const auto& v : variables) {
    const Eigen::Index need = v.projection.required_dim();
    require(need < 0 || need == v.score.dim(), ErrorCode::DimensionMismatch,
            "variable '" + v.name + "': projection incompatible with dimension");
  }
}

Eigen::VectorXd lmc_update(const Eigen::VectorXd& x, const Eigen::VectorXd& score,
                           const Eigen::VectorXd* coupling_grad, double gamma,
                           double delta, const Eigen::VectorXd* noise) {
  Eigen::VectorXd out = x + delta * score;
  if (coupling_grad) out -= (gamma * delta) * *coupling_grad;
  if (noise) out += std::sqrt(2.0 * delta) * *noise;
  return out;
}

Eigen::VectorXd ddpm_update(const DiffusionSchedule& schedule, int t,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& score,
                            double noise_scale_k, const Eigen::VectorXd* noise) {
  const double beta = schedule.beta(t);
  Eigen::VectorXd out = (x + beta * score) / std::sqrt(schedule.alpha(t));
  if (noise && t > 1) out += (noise_scale_k * std::sqrt(beta)) * *noise;
  return out;
}

SampleBatch run_pcd_lmc(const CoupledSystem& system, std::size_t batch,
                        const SamplerOptions& options) {
  system.validate();
  require(system.lmc.has_value(), ErrorCode::Configuration,
          "LMC sampling needs step size and iteration count");
  const double delta = system.lmc->step_size;
  const int iterations = system.lmc->iterations;
  const bool coupled = system.coupled();
  const std::size_t n = system.variables.size();
  const NoiseLevel level = NoiseLevel::data();
  SampleBatch out = make_batch(system, batch);
  std::vector<std::uint64_t> calls(batch, 0);

  for_each_sample(batch, options.workers, [&](std::size_t s) {
    std::vector<Eigen::VectorXd> xs(n);
    for (std::size_t v = 0; v < n; ++v) xs[v] = draw(system, s, v, 0);
    ProjectionTally tally;
    std::vector<Eigen::VectorXd> next(n);
    for (int t = 1; t <= iterations; ++t) {
      CostValue c;
      if (coupled) c = system.cost->evaluate(xs, level);
      for (std::size_t v = 0; v < n; ++v) {
        const CoupledVariable& var = system.variables[v];
        const Eigen::VectorXd score = var.score.score(xs[v], level);
        Eigen::VectorXd eps;
        if (options.inject_noise) eps = draw(system, s, v, static_cast<std::uint32_t>(t));
        next[v] = lmc_update(xs[v], score, coupled ? &c.grads[v] : nullptr,
                             system.gamma, delta,
                             options.inject_noise ? &eps : nullptr);
        project_into(var, next[v], tally);
      }
      std::swap(xs, next);
    }
    finish_sample(out, s, xs, tally, calls);
  });
  out.projection_calls = total(calls);
  return out;
}

SampleBatch run_pcd_ddpm(const CoupledSystem& system, std::size_t batch,
                         const SamplerOptions& options) {
  system.validate();
  return run_ddpm_loop(system, batch, options, system.cost);
}

SampleBatch run_pcd_dps(const CoupledSystem& system, std::size_t batch,
                        const SamplerOptions& options, bool stop_gradient) {
  system.validate();
  CostPtr cost;
  if (system.cost) cost = ps_wrap(system.cost, scores_of(system), stop_gradient);
  return run_ddpm_loop(system, batch, options, cost);
}

SampleBatch run_cg_reduction(const GuidanceProblem& problem, std::size_t batch,
                             const SamplerOptions& options) {
  require(problem.y0.size() > 0, ErrorCode::Configuration, "guidance: empty y0");
  CoupledSystem system;
  system.variables.push_back({"x", problem.prior, ProjectionOperator::identity()});
  system.variables.push_back({"y", ScoreModel::standard_normal(problem.y0.size()),
                              ProjectionOperator::singleton(problem.y0)});
  system.cost = std::make_shared<GaussianLikelihoodCost>(problem.likelihood_sigma);
  system.gamma = problem.gamma;
  system.lmc = problem.lmc;
  system.seed = problem.seed;
  return run_pcd_lmc(system, batch, options);
}

}  // namespace pcd
