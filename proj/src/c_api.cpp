#include "pcd/pcd.h"

#include <exception>
#include <new>
#include <string>

#include "pcd/error.hpp"
#include "pcd/io.hpp"
#include "pcd/metrics.hpp"
#include "pcd/plot.hpp"
#include "pcd/projection.hpp"
#include "pcd/runner.hpp"

struct pcd_config {
  pcd::RunConfig config;
};

struct pcd_report {
  std::string summary;
  std::string output_dir;
  std::string csv;
  std::size_t rows = 0;
};

namespace {

thread_local std::string g_last_error;

pcd_status status_of(pcd::ErrorCode code) {
  switch (code) {
    case pcd::ErrorCode::InvalidArgument: return PCD_ERR_INVALID_ARGUMENT;
    case pcd::ErrorCode::Configuration: return PCD_ERR_CONFIGURATION;
    case pcd::ErrorCode::DimensionMismatch: return PCD_ERR_DIMENSION;
    case pcd::ErrorCode::Domain: return PCD_ERR_DOMAIN;
    case pcd::ErrorCode::Io: return PCD_ERR_IO;
    case pcd::ErrorCode::Crowded: return PCD_ERR_CROWDED;
  }
  return PCD_ERR_INTERNAL;
}

template <class F>
pcd_status guarded(F&& body) noexcept {
  try {
    body();
    g_last_error.clear();
    return PCD_OK;
  } catch (const pcd::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return PCD_ERR_INTERNAL;
}

void need(bool cond, const char* what) {
  pcd::require(cond, pcd::ErrorCode::InvalidArgument, what);
}

pcd::VelocityChainSet chain_set(double sx, double sy, double v_max, double dt,
                                const pcd_admm_options* options) {
  pcd::VelocityChainSet set{{sx, sy}, v_max, dt, {}};
  if (options) set.admm = {options->penalty, options->max_iterations, options->tolerance};
  need(v_max > 0.0 && dt > 0.0, "v_max and dt must be > 0");
  need(set.admm.penalty > 0.0 && set.admm.max_iterations >= 1 && set.admm.tolerance > 0.0,
       "ADMM options must be positive");
  return set;
}

void fill_info(pcd_projection_info* info, const pcd::ProjectionInfo& src) {
  if (!info) return;
  info->converged = src.converged ? 1 : 0;
  info->iterations = src.iterations;
  info->residual = src.residual;
}

Eigen::VectorXd copy_in(const double* data, std::size_t n) {
  return Eigen::Map<const Eigen::VectorXd>(data, static_cast<Eigen::Index>(n));
}

template <class Metric>
pcd_status similarity(const double* a, std::size_t la, const double* b, std::size_t lb,
                      std::size_t dim, double* out, Metric metric) {
  return guarded([&] {
    need(out && dim > 0, "output pointer and point_dim are required");
    need((a || la == 0) && (b || lb == 0), "null sequence");
    *out = metric(copy_in(a, la * dim), copy_in(b, lb * dim), static_cast<int>(dim));
  });
}

}  // namespace

extern "C" {

const char* pcd_version(void) { return "0.1.0"; }

const char* pcd_last_error(void) { return g_last_error.c_str(); }

const char* pcd_status_name(pcd_status status) {
  switch (status) {
    case PCD_OK: return "ok";
    case PCD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PCD_ERR_CONFIGURATION: return "configuration error";
    case PCD_ERR_DIMENSION: return "dimension mismatch";
    case PCD_ERR_DOMAIN: return "domain error";
    case PCD_ERR_IO: return "i/o error";
    case PCD_ERR_CROWDED: return "environment too crowded";
    case PCD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void pcd_admm_default_options(pcd_admm_options* options) {
  if (!options) return;
  const pcd::AdmmOptions d;
  *options = {d.penalty, d.max_iterations, d.tolerance};
}

pcd_status pcd_project_velocity_chain(const double* x_hat, size_t horizon, double start_x,
                                      double start_y, double v_max, double dt,
                                      const pcd_admm_options* options, double* out,
                                      pcd_projection_info* info) {
  return guarded([&] {
    need(x_hat && out && horizon > 0, "non-empty input and output buffers are required");
    const auto set = chain_set(start_x, start_y, v_max, dt, options);
    const pcd::ChainProjection p = pcd::project_velocity_chain(set, copy_in(x_hat, 2 * horizon));
    Eigen::Map<Eigen::VectorXd>(out, static_cast<Eigen::Index>(2 * horizon)) = p.trajectory;
    fill_info(info, p.info);
  });
}

pcd_status pcd_project_velocity_chain_batch(const double* x_hats, size_t batch,
                                            size_t horizon, double start_x, double start_y,
                                            double v_max, double dt,
                                            const pcd_admm_options* options, double* out,
                                            pcd_projection_info* info) {
  return guarded([&] {
    need(x_hats && out && horizon > 0 && batch > 0,
         "non-empty input and output buffers are required");
    const auto set = chain_set(start_x, start_y, v_max, dt, options);
    std::vector<Eigen::VectorXd> xs;
    xs.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b)
      xs.push_back(copy_in(x_hats + b * 2 * horizon, 2 * horizon));
    const pcd::ChainBatchProjection p = pcd::project_velocity_chain_batch(set, xs);
    for (std::size_t b = 0; b < batch; ++b)
      Eigen::Map<Eigen::VectorXd>(out + b * 2 * horizon,
                                  static_cast<Eigen::Index>(2 * horizon)) = p.trajectories[b];
    fill_info(info, p.info);
  });
}

pcd_status pcd_constraint_satisfaction(const double* traj, size_t horizon, double start_x,
                                       double start_y, double v_max, double dt, int* out) {
  return guarded([&] {
    need(traj && out && horizon > 0, "non-empty trajectory and output are required");
    need(v_max > 0.0 && dt > 0.0, "v_max and dt must be > 0");
    *out = pcd::constraint_satisfaction(copy_in(traj, 2 * horizon), {start_x, start_y},
                                        v_max, dt);
  });
}

pcd_status pcd_dtw(const double* a, size_t len_a, const double* b, size_t len_b,
                   size_t point_dim, double* out) {
  return similarity(a, len_a, b, len_b, point_dim, out,
                    [](const auto& x, const auto& y, int d) { return pcd::dtw(x, y, d); });
}

pcd_status pcd_dfd(const double* a, size_t len_a, const double* b, size_t len_b,
                   size_t point_dim, double* out) {
  return similarity(a, len_a, b, len_b, point_dim, out,
                    [](const auto& x, const auto& y, int d) { return pcd::dfd(x, y, d); });
}

pcd_status pcd_config_parse(const char* text, pcd_config** out) {
  return guarded([&] {
    need(text && out, "text and output handle are required");
    *out = nullptr;
    *out = new pcd_config{pcd::parse_config(text)};
  });
}

pcd_status pcd_config_load(const char* path, pcd_config** out) {
  return guarded([&] {
    need(path && out, "path and output handle are required");
    *out = nullptr;
    *out = new pcd_config{pcd::load_config(path)};
  });
}

pcd_status pcd_config_set_seed(pcd_config* config, uint64_t seed) {
  return guarded([&] {
    need(config, "null config");
    config->config.seed = seed;
  });
}

pcd_status pcd_config_set_workers(pcd_config* config, unsigned workers) {
  return guarded([&] {
    need(config, "null config");
    config->config.workers = workers;
  });
}

pcd_status pcd_config_set_output_dir(pcd_config* config, const char* dir) {
  return guarded([&] {
    need(config && dir && *dir, "config and non-empty directory are required");
    config->config.output_dir = dir;
  });
}

pcd_status pcd_config_cell_count(const pcd_config* config, size_t* out) {
  return guarded([&] {
    need(config && out, "config and output are required");
    *out = pcd::plan_cells(config->config).size();
  });
}

void pcd_config_free(pcd_config* config) { delete config; }

pcd_status pcd_execute(const pcd_config* config, pcd_report** out) {
  return guarded([&] {
    need(config && out, "config and output handle are required");
    *out = nullptr;
    const pcd::RunReport r = pcd::execute(config->config);
    *out = new pcd_report{pcd::summary_to_json(r), r.output_dir.string(), r.csv.string(),
                          r.rows.size()};
  });
}

const char* pcd_report_summary_json(const pcd_report* report) {
  return report ? report->summary.c_str() : "";
}

const char* pcd_report_output_dir(const pcd_report* report) {
  return report ? report->output_dir.c_str() : "";
}

const char* pcd_report_csv_path(const pcd_report* report) {
  return report ? report->csv.c_str() : "";
}

size_t pcd_report_row_count(const pcd_report* report) { return report ? report->rows : 0; }

void pcd_report_free(pcd_report* report) { delete report; }

pcd_status pcd_plot_cell(const char* cell_json_path, const char* svg_path) {
  return guarded([&] {
    need(cell_json_path && svg_path, "input and output paths are required");
    pcd::emit_plot(pcd::plot_data_from_json(pcd::read_file(cell_json_path)), svg_path);
  });
}

}  // extern "C"
