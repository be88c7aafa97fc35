/* C interface to the projected coupled diffusion library. Every function
 * returns a pcd_status; on failure pcd_last_error() describes the cause for
 * the calling thread. Handles are opaque and owned by the caller. */
#ifndef PCD_PCD_H
#define PCD_PCD_H

#include <stddef.h>
#include <stdint.h>

#if defined(PCD_BUILDING_LIBRARY)
#define PCD_API __attribute__((visibility("default")))
#else
#define PCD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcd_status {
  PCD_OK = 0,
  PCD_ERR_INVALID_ARGUMENT = 1,
  PCD_ERR_CONFIGURATION = 2,
  PCD_ERR_DIMENSION = 3,
  PCD_ERR_DOMAIN = 4,
  PCD_ERR_IO = 5,
  PCD_ERR_CROWDED = 6,
  PCD_ERR_INTERNAL = 7
} pcd_status;

PCD_API const char* pcd_version(void);
/* Message of the last failed call on this thread; empty after success. */
PCD_API const char* pcd_last_error(void);
PCD_API const char* pcd_status_name(pcd_status status);

/* ---- velocity-chain projection ---------------------------------------- */

typedef struct pcd_admm_options {
  double penalty;
  int max_iterations;
  double tolerance;
} pcd_admm_options;

typedef struct pcd_projection_info {
  int converged;
  int iterations;
  double residual;
} pcd_projection_info;

PCD_API void pcd_admm_default_options(pcd_admm_options* options);

/* x_hat and out hold `horizon` waypoints as row-major (x, y) pairs; out may
 * alias x_hat. options and info may be NULL. */
PCD_API pcd_status pcd_project_velocity_chain(const double* x_hat, size_t horizon,
                                              double start_x, double start_y,
                                              double v_max, double dt,
                                              const pcd_admm_options* options,
                                              double* out, pcd_projection_info* info);

/* `batch` trajectories stored back to back; one ADMM run shared by the batch. */
PCD_API pcd_status pcd_project_velocity_chain_batch(
    const double* x_hats, size_t batch, size_t horizon, double start_x, double start_y,
    double v_max, double dt, const pcd_admm_options* options, double* out,
    pcd_projection_info* info);

PCD_API pcd_status pcd_constraint_satisfaction(const double* traj, size_t horizon,
                                               double start_x, double start_y,
                                               double v_max, double dt, int* out);

/* ---- trajectory similarity -------------------------------------------- */

/* a has len_a points and b has len_b points, each point_dim coordinates. */
PCD_API pcd_status pcd_dtw(const double* a, size_t len_a, const double* b, size_t len_b,
                           size_t point_dim, double* out);
PCD_API pcd_status pcd_dfd(const double* a, size_t len_a, const double* b, size_t len_b,
                           size_t point_dim, double* out);

/* ---- experiment runs -------------------------------------------------- */

typedef struct pcd_config pcd_config;
typedef struct pcd_report pcd_report;

PCD_API pcd_status pcd_config_parse(const char* text, pcd_config** out);
PCD_API pcd_status pcd_config_load(const char* path, pcd_config** out);
PCD_API pcd_status pcd_config_set_seed(pcd_config* config, uint64_t seed);
PCD_API pcd_status pcd_config_set_workers(pcd_config* config, unsigned workers);
PCD_API pcd_status pcd_config_set_output_dir(pcd_config* config, const char* dir);
PCD_API pcd_status pcd_config_cell_count(const pcd_config* config, size_t* out);
PCD_API void pcd_config_free(pcd_config* config);

PCD_API pcd_status pcd_execute(const pcd_config* config, pcd_report** out);
/* Strings stay valid until pcd_report_free. */
PCD_API const char* pcd_report_summary_json(const pcd_report* report);
PCD_API const char* pcd_report_output_dir(const pcd_report* report);
PCD_API const char* pcd_report_csv_path(const pcd_report* report);
PCD_API size_t pcd_report_row_count(const pcd_report* report);
PCD_API void pcd_report_free(pcd_report* report);

/* Renders the plot data written for one run cell as SVG. */
PCD_API pcd_status pcd_plot_cell(const char* cell_json_path, const char* svg_path);

#ifdef __cplusplus
}
#endif

#endif /* PCD_PCD_H */
