#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcd/scenarios.hpp"

namespace pcd {

enum class SamplerKind { Lmc, Ddpm, Dps };

SamplerKind parse_sampler_kind(const std::string& name);
std::string to_string(SamplerKind kind);

struct ScheduleConfig {
  int steps = 25;
  double beta_min = 0.01;
  double beta_max = 0.5;
};

struct RunConfig {
  std::string scenario;  // corridor | empty | highways
  SamplerKind sampler = SamplerKind::Lmc;
  CouplingKind coupling = CouplingKind::SquaredHinge;
  std::vector<double> gammas{1.0};
  bool projection = true;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  unsigned workers = 0;

  // navigation
  std::size_t robots = 2;
  std::size_t configurations = 4;
  double v_max = 0.0;  // 0 selects the environment's first preset
  int horizon = 48;
  double dt = 1.0;
  AdmmOptions admm{};

  ScheduleConfig schedule{};
  LmcSettings lmc{1e-2, 2000};
  double noise_scale_k = 1.0;
  bool ps_stop_gradient = false;

  std::string output_dir = "pcd_out";
  bool plots = true;

  bool navigation() const { return scenario != "corridor"; }
};

/// Parses a JSON run description. Unknown keys are rejected; syntax errors
/// report line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// One (scenario, gamma, sampler) cell of a run.
struct RunCell {
  std::size_t index = 0;
  double gamma = 0.0;
};

std::vector<RunCell> plan_cells(const RunConfig& config);

/// One CSV row: metrics of a single sample tuple.
struct MetricRow {
  std::size_t cell = 0;
  double gamma = 0.0;
  std::size_t configuration = 0;
  std::size_t sample = 0;
  int su = 0;
  int rs = 0;
  int cs = 0;
  double dtw = 0.0;
  double dfd = 0.0;
  int obstacle_safe = 0;
  double da_proxy = 0.0;
  int overlap = 0;
  int converged = 0;
};

inline constexpr const char* kCsvHeader =
    "cell,gamma,configuration,sample,su,rs,cs,dtw,dfd,obstacle_safe,da_proxy,overlap,"
    "converged";

inline const std::vector<std::string> kMetricColumns{
    "su", "rs", "cs", "dtw", "dfd", "obstacle_safe", "da_proxy", "overlap", "converged"};

struct ColumnStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct CellSummary {
  RunCell cell;
  std::size_t rows = 0;
  std::vector<ColumnStats> columns;  // in kMetricColumns order
  double success_rate = 0.0;
  std::uint64_t projection_calls = 0;
  std::uint64_t nonconverged_projections = 0;
  double wall_clock_seconds = 0.0;
  std::filesystem::path plot_data;
  std::optional<std::filesystem::path> plot;
};

struct RunReport {
  RunConfig config;
  std::vector<CellSummary> cells;
  std::vector<MetricRow> rows;
  double wall_clock_seconds = 0.0;
  std::filesystem::path output_dir;
  std::filesystem::path csv;
  std::filesystem::path summary;
};

/// Output directory after applying the PCD_OUTPUT_ROOT prefix to relative paths.
std::filesystem::path resolve_output_dir(const RunConfig& config);

/// Runs every cell, writes samples.csv, summary.json and per-cell plot data.
RunReport execute(const RunConfig& config);

std::string rows_to_csv(const std::vector<MetricRow>& rows);
std::string summary_to_json(const RunReport& report);

}  // namespace pcd
