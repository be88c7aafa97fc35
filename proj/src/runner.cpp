#include "pcd/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <json.hpp>

#include "pcd/error.hpp"
#include "pcd/io.hpp"
#include "pcd/metrics.hpp"
#include "pcd/plot.hpp"
#include "pcd/random.hpp"

namespace pcd {

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "lmc") return SamplerKind::Lmc;
  if (name == "ddpm") return SamplerKind::Ddpm;
  if (name == "dps") return SamplerKind::Dps;
  fail(ErrorCode::Configuration,
       "unknown sampler '" + name + "' (expected lmc, ddpm or dps)");
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Lmc: return "lmc";
    case SamplerKind::Ddpm: return "ddpm";
    case SamplerKind::Dps: return "dps";
  }
  return "lmc";
}

namespace {

using nlohmann::json;

enum SeedTag : std::uint32_t { kConfigurationTag = 1, kSamplerTag = 2 };
constexpr std::size_t kPlotTuples = 8;

std::string key_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const json& obj, const std::string& parent,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    require(known, ErrorCode::Configuration,
            "unknown key '" + key_path(parent, key) + "'");
  }
}

const json& object_at(const json& obj, const std::string& key, const std::string& parent) {
  const json& v = obj.at(key);
  require(v.is_object(), ErrorCode::Configuration,
          "key '" + key_path(parent, key) + "' must be an object");
  return v;
}

double number_at(const json& obj, const std::string& key, const std::string& parent) {
  const json& v = obj.at(key);
  require(v.is_number(), ErrorCode::Configuration,
          "key '" + key_path(parent, key) + "' must be a number");
  const double d = v.get<double>();
  require(std::isfinite(d), ErrorCode::Configuration,
          "key '" + key_path(parent, key) + "' must be finite");
  return d;
}

std::int64_t integer_at(const json& obj, const std::string& key, const std::string& parent,
                        std::int64_t min) {
  const json& v = obj.at(key);
  require(v.is_number_integer(), ErrorCode::Configuration,
          "key '" + key_path(parent, key) + "' must be an integer");
  const std::int64_t i = v.is_number_unsigned()
                             ? static_cast<std::int64_t>(std::min<std::uint64_t>(
                                   v.get<std::uint64_t>(),
                                   std::numeric_limits<std::int64_t>::max()))
                             : v.get<std::int64_t>();
  require(i >= min, ErrorCode::Configuration,
          "key '" + key_path(parent, key) + "' must be >= " + std::to_string(min));
  return i;
}

bool bool_at(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  require(v.is_boolean(), ErrorCode::Configuration, "key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string string_at(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  require(v.is_string(), ErrorCode::Configuration, "key '" + key + "' must be a string");
  return v.get<std::string>();
}

void positive(double v, const std::string& key) {
  require(v > 0.0, ErrorCode::Configuration, "key '" + key + "' must be > 0");
}

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

RunConfig parse_object(const json& root) {
  require(root.is_object(), ErrorCode::Configuration, "config must be a JSON object");
  reject_unknown(root, "",
                 {"scenario", "sampler", "coupling", "gamma", "projection", "batch_size",
                  "seed", "workers", "robots", "configurations", "v_max", "horizon", "dt",
                  "admm", "schedule", "lmc", "noise_scale_k", "ps_stop_gradient",
                  "output_dir", "plots"});
  RunConfig c;
  require(root.contains("scenario"), ErrorCode::Configuration, "missing key 'scenario'");
  c.scenario = string_at(root, "scenario");
  require(c.scenario == "corridor" || c.scenario == "empty" || c.scenario == "highways",
          ErrorCode::Configuration,
          "key 'scenario': unknown preset '" + c.scenario +
              "' (expected corridor, empty or highways)");
  if (!c.navigation()) {
    for (const char* k : {"robots", "configurations", "v_max", "horizon", "dt", "admm"})
      require(!root.contains(k), ErrorCode::Configuration,
              std::string("key '") + k + "' applies only to navigation scenarios");
  }

  c.sampler = c.navigation() ? SamplerKind::Ddpm : SamplerKind::Lmc;
  if (root.contains("sampler")) c.sampler = parse_sampler_kind(string_at(root, "sampler"));
  if (root.contains("coupling")) c.coupling = parse_coupling_kind(string_at(root, "coupling"));
  require(c.navigation() || c.coupling != CouplingKind::Dpp, ErrorCode::Configuration,
          "key 'coupling': dpp is not defined for the corridor scenario");

  if (root.contains("gamma")) {
    const json& g = root.at("gamma");
    c.gammas.clear();
    if (g.is_array()) {
      require(!g.empty(), ErrorCode::Configuration, "key 'gamma': sweep list is empty");
      for (std::size_t i = 0; i < g.size(); ++i) {
        require(g[i].is_number(), ErrorCode::Configuration,
                "key 'gamma[" + std::to_string(i) + "]' must be a number");
        c.gammas.push_back(g[i].get<double>());
      }
    } else {
      c.gammas.push_back(number_at(root, "gamma", ""));
    }
    for (double v : c.gammas)
      require(std::isfinite(v) && v >= 0.0, ErrorCode::Configuration,
              "key 'gamma': values must be finite and >= 0");
  }
  if (root.contains("projection")) c.projection = bool_at(root, "projection");
  if (root.contains("batch_size"))
    c.batch_size = static_cast<std::size_t>(integer_at(root, "batch_size", "", 1));
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    require(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0),
            ErrorCode::Configuration, "key 'seed' must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (root.contains("workers"))
    c.workers = static_cast<unsigned>(integer_at(root, "workers", "", 0));
  if (root.contains("robots"))
    c.robots = static_cast<std::size_t>(integer_at(root, "robots", "", 1));
  if (root.contains("configurations"))
    c.configurations = static_cast<std::size_t>(integer_at(root, "configurations", "", 1));
  if (root.contains("v_max")) {
    c.v_max = number_at(root, "v_max", "");
    positive(c.v_max, "v_max");
  }
  if (root.contains("horizon")) c.horizon = static_cast<int>(integer_at(root, "horizon", "", 1));
  if (root.contains("dt")) {
    c.dt = number_at(root, "dt", "");
    positive(c.dt, "dt");
  }
  if (root.contains("admm")) {
    const json& a = object_at(root, "admm", "");
    reject_unknown(a, "admm", {"penalty", "max_iterations", "tolerance"});
    if (a.contains("penalty")) c.admm.penalty = number_at(a, "penalty", "admm");
    if (a.contains("max_iterations"))
      c.admm.max_iterations = static_cast<int>(integer_at(a, "max_iterations", "admm", 1));
    if (a.contains("tolerance")) c.admm.tolerance = number_at(a, "tolerance", "admm");
    positive(c.admm.penalty, "admm.penalty");
    positive(c.admm.tolerance, "admm.tolerance");
  }
  if (root.contains("schedule")) {
    const json& s = object_at(root, "schedule", "");
    reject_unknown(s, "schedule", {"steps", "beta_min", "beta_max"});
    if (s.contains("steps")) c.schedule.steps = static_cast<int>(integer_at(s, "steps", "schedule", 1));
    if (s.contains("beta_min")) c.schedule.beta_min = number_at(s, "beta_min", "schedule");
    if (s.contains("beta_max")) c.schedule.beta_max = number_at(s, "beta_max", "schedule");
    require(c.schedule.beta_min > 0.0 && c.schedule.beta_min <= c.schedule.beta_max &&
                c.schedule.beta_max < 1.0,
            ErrorCode::Configuration,
            "key 'schedule': need 0 < beta_min <= beta_max < 1");
  }
  if (root.contains("lmc")) {
    const json& l = object_at(root, "lmc", "");
    reject_unknown(l, "lmc", {"step_size", "iterations"});
    if (l.contains("step_size")) c.lmc.step_size = number_at(l, "step_size", "lmc");
    if (l.contains("iterations"))
      c.lmc.iterations = static_cast<int>(integer_at(l, "iterations", "lmc", 0));
    positive(c.lmc.step_size, "lmc.step_size");
  }
  if (root.contains("noise_scale_k")) {
    c.noise_scale_k = number_at(root, "noise_scale_k", "");
    require(c.noise_scale_k >= 1.0, ErrorCode::Configuration,
            "key 'noise_scale_k' must be >= 1");
  }
  if (root.contains("ps_stop_gradient")) c.ps_stop_gradient = bool_at(root, "ps_stop_gradient");
  if (root.contains("output_dir")) {
    c.output_dir = string_at(root, "output_dir");
    require(!c.output_dir.empty(), ErrorCode::Configuration, "key 'output_dir' is empty");
  }
  if (root.contains("plots")) c.plots = bool_at(root, "plots");
  return c;
}

// ------------------------------------------------------------------ metrics

struct CellRun {
  std::vector<MetricRow> rows;
  std::vector<int> config_success;
  std::uint64_t projection_calls = 0;
  std::uint64_t nonconverged = 0;
  PlotData plot;
};

SampleBatch run_sampler(const RunConfig& config, const CoupledSystem& system,
                        const SamplerOptions& options) {
  switch (config.sampler) {
    case SamplerKind::Lmc: return run_pcd_lmc(system, config.batch_size, options);
    case SamplerKind::Ddpm: return run_pcd_ddpm(system, config.batch_size, options);
    case SamplerKind::Dps:
      return run_pcd_dps(system, config.batch_size, options, config.ps_stop_gradient);
  }
  fail(ErrorCode::Configuration, "unsupported sampler");
}

DiffusionSchedule schedule_of(const RunConfig& config) {
  return make_linear_schedule(config.schedule.steps, config.schedule.beta_min,
                              config.schedule.beta_max);
}

void tally(CellRun& run, const SampleBatch& batch) {
  run.projection_calls += batch.projection_calls;
  for (auto n : batch.nonconverged_projections) run.nonconverged += n;
}

CellRun run_corridor_cell(const RunConfig& config, const RunCell& cell,
                          const SamplerOptions& options) {
  const CorridorSpec spec;
  CorridorOptions opt;
  opt.projection = config.projection;
  opt.lmc = config.lmc;
  opt.seed = config.seed;
  CoupledSystem system = build_corridor(spec, config.coupling, cell.gamma, opt);
  if (config.sampler != SamplerKind::Lmc) system.schedule = schedule_of(config);
  system.noise_scale_k = config.noise_scale_k;
  const SampleBatch batch = run_sampler(config, system, options);

  CellRun run;
  tally(run, batch);
  int any_ok = 0;
  for (std::size_t s = 0; s < batch.batch_size; ++s) {
    const Eigen::VectorXd& x = batch.samples[0][s];
    const Eigen::VectorXd& y = batch.samples[1][s];
    MetricRow r;
    r.cell = cell.index;
    r.gamma = cell.gamma;
    r.sample = s;
    r.overlap = corridor_overlap(spec, x[0], y[0]);
    r.rs = 1 - r.overlap;
    r.cs = 1 - corridor_violation(spec, x[0], y[0]);
    r.dtw = dtw(x, y, 1);
    r.dfd = dfd(x, y, 1);
    r.obstacle_safe = 1;
    r.da_proxy = 1.0;
    r.converged = batch.converged[s];
    any_ok |= (r.rs && r.cs);
    run.rows.push_back(r);
    run.plot.first.push_back(x[0]);
    run.plot.second.push_back(y[0]);
  }
  for (auto& r : run.rows) r.su = any_ok;
  run.config_success.push_back(any_ok);
  run.plot.kind = PlotData::Kind::Corridor;
  run.plot.gamma = cell.gamma;
  run.plot.corridor_length = spec.length;
  run.plot.block_lengths = {spec.block_lengths[0], spec.block_lengths[1]};
  return run;
}

CellRun run_nav_cell(const RunConfig& config, const RunCell& cell,
                     const SamplerOptions& options) {
  const NavEnvironment env = make_environment(config.scenario);
  const double v_max = config.v_max > 0.0 ? config.v_max : env.v_max_presets.front();
  CellRun run;
  run.plot.kind = PlotData::Kind::Navigation;
  run.plot.gamma = cell.gamma;
  run.plot.half_width = env.half_width;
  run.plot.robot_radius = env.robot_radius;
  run.plot.v_max = v_max;
  run.plot.dt = config.dt;
  run.plot.obstacles = env.field.obstacles();

  for (std::size_t c = 0; c < config.configurations; ++c) {
    const InitialConfiguration init = sample_initial_configuration(
        env, config.robots, derive_seed(config.seed, kConfigurationTag, c));
    NavOptions opt;
    opt.horizon = config.horizon;
    opt.dt = config.dt;
    opt.projection = config.projection;
    opt.admm = config.admm;
    opt.schedule = schedule_of(config);
    opt.seed = derive_seed(config.seed, kSamplerTag, c);
    CoupledSystem system =
        build_nav_system(env, init, config.coupling, cell.gamma, v_max, opt);
    if (config.sampler == SamplerKind::Lmc) system.lmc = config.lmc;
    system.noise_scale_k = config.noise_scale_k;
    const SampleBatch batch = run_sampler(config, system, options);
    tally(run, batch);

    const std::size_t first_row = run.rows.size();
    int any_ok = 0;
    const std::size_t n = init.robots();
    for (std::size_t s = 0; s < batch.batch_size; ++s) {
      std::vector<Eigen::VectorXd> trajs(n);
      for (std::size_t i = 0; i < n; ++i) trajs[i] = batch.samples[i][s];
      MetricRow r;
      r.cell = cell.index;
      r.gamma = cell.gamma;
      r.configuration = c;
      r.sample = s;
      r.rs = inter_robot_safety(trajs, env.robot_radius);
      r.obstacle_safe = obstacle_safe(trajs, env.field, env.robot_radius);
      r.cs = 1;
      double da = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        r.cs &= constraint_satisfaction(trajs[i], init.starts[i], v_max, config.dt);
        da += data_adherence_proxy(trajs[i], pattern_for(env, init.goals[i]));
      }
      r.da_proxy = da / static_cast<double>(n);
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          r.dtw += dtw(trajs[i], trajs[j]);
          r.dfd += dfd(trajs[i], trajs[j]);
          ++pairs;
        }
      if (pairs) {
        r.dtw /= static_cast<double>(pairs);
        r.dfd /= static_cast<double>(pairs);
      }
      r.overlap = 1 - r.rs;
      r.converged = batch.converged[s];
      any_ok |= (r.rs && r.obstacle_safe);
      run.rows.push_back(r);
      if (c == 0 && s < kPlotTuples) run.plot.tuples.push_back(std::move(trajs));
    }
    for (std::size_t k = first_row; k < run.rows.size(); ++k) run.rows[k].su = any_ok;
    run.config_success.push_back(any_ok);
    if (c == 0) {
      run.plot.starts = init.starts;
      run.plot.goals = init.goals;
    }
  }
  return run;
}

double column_value(const MetricRow& r, std::size_t k) {
  switch (k) {
    case 0: return r.su;
    case 1: return r.rs;
    case 2: return r.cs;
    case 3: return r.dtw;
    case 4: return r.dfd;
    case 5: return r.obstacle_safe;
    case 6: return r.da_proxy;
    case 7: return r.overlap;
    default: return r.converged;
  }
}

std::vector<ColumnStats> column_stats(const std::vector<MetricRow>& rows) {
  std::vector<ColumnStats> out;
  for (std::size_t k = 0; k < kMetricColumns.size(); ++k) {
    ColumnStats s{kMetricColumns[k]};
    if (!rows.empty()) {
      double sum = 0.0;
      for (const auto& r : rows) sum += column_value(r, k);
      s.mean = sum / static_cast<double>(rows.size());
      double sq = 0.0;
      for (const auto& r : rows) {
        const double d = column_value(r, k) - s.mean;
        sq += d * d;
      }
      s.std = std::sqrt(sq / static_cast<double>(rows.size()));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string reason = e.what();
    if (const auto colon = reason.find(": "); colon != std::string::npos)
      reason.erase(0, colon + 2);
    fail(ErrorCode::Configuration,
         "config parse error at " + location(text, e.byte) + ": " + reason);
  }
  try {
    return parse_object(root);
  } catch (const json::exception& e) {
    fail(ErrorCode::Configuration, std::string("config error: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<RunCell> plan_cells(const RunConfig& config) {
  std::vector<RunCell> cells;
  for (std::size_t i = 0; i < config.gammas.size(); ++i) cells.push_back({i, config.gammas[i]});
  return cells;
}

std::filesystem::path resolve_output_dir(const RunConfig& config) {
  std::filesystem::path dir = config.output_dir;
  if (dir.is_relative()) {
    if (const char* root = std::getenv("PCD_OUTPUT_ROOT"); root && *root)
      dir = std::filesystem::path(root) / dir;
  }
  return dir;
}

std::string rows_to_csv(const std::vector<MetricRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.cell) + ',' + fmt(r.gamma) + ',' +
           std::to_string(r.configuration) + ',' + std::to_string(r.sample) + ',' +
           std::to_string(r.su) + ',' + std::to_string(r.rs) + ',' + std::to_string(r.cs) +
           ',' + fmt(r.dtw) + ',' + fmt(r.dfd) + ',' + std::to_string(r.obstacle_safe) + ',' +
           fmt(r.da_proxy) + ',' + std::to_string(r.overlap) + ',' +
           std::to_string(r.converged) + '\n';
  }
  return out;
}

std::string summary_to_json(const RunReport& report) {
  const RunConfig& c = report.config;
  json j;
  j["scenario"] = c.scenario;
  j["sampler"] = to_string(c.sampler);
  j["coupling"] = to_string(c.coupling);
  j["projection"] = c.projection;
  j["seed"] = c.seed;
  j["batch_size"] = c.batch_size;
  j["configurations"] = c.navigation() ? c.configurations : 1;
  j["total_rows"] = report.rows.size();
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  j["csv"] = report.csv.filename().string();
  j["cells"] = json::array();
  for (const auto& cell : report.cells) {
    json e;
    e["cell"] = cell.cell.index;
    e["gamma"] = cell.cell.gamma;
    e["rows"] = cell.rows;
    e["success_rate"] = cell.success_rate;
    e["projection_calls"] = cell.projection_calls;
    e["nonconverged_projections"] = cell.nonconverged_projections;
    e["wall_clock_seconds"] = cell.wall_clock_seconds;
    json m = json::object();
    for (const auto& s : cell.columns) m[s.name] = {{"mean", s.mean}, {"std", s.std}};
    e["metrics"] = std::move(m);
    e["plot_data"] = cell.plot_data.filename().string();
    if (cell.plot) e["plot"] = cell.plot->filename().string();
    j["cells"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

RunReport execute(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  report.output_dir = resolve_output_dir(config);
  SamplerOptions options;
  options.workers = config.workers;

  for (const RunCell& cell : plan_cells(config)) {
    const auto cell_start = std::chrono::steady_clock::now();
    CellRun run;
    try {
      run = config.navigation() ? run_nav_cell(config, cell, options)
                                : run_corridor_cell(config, cell, options);
    } catch (const Error& e) {
      fail(e.code(), "cell " + std::to_string(cell.index) + " (gamma=" + fmt(cell.gamma) +
                         "): " + e.what());
    }
    CellSummary summary;
    summary.cell = cell;
    summary.rows = run.rows.size();
    summary.columns = column_stats(run.rows);
    double su = 0.0;
    for (int ok : run.config_success) su += ok;
    summary.success_rate =
        run.config_success.empty() ? 0.0 : su / static_cast<double>(run.config_success.size());
    summary.projection_calls = run.projection_calls;
    summary.nonconverged_projections = run.nonconverged;

    const std::string stem = "cell_" + std::to_string(cell.index);
    summary.plot_data = report.output_dir / (stem + ".json");
    write_file_atomic(summary.plot_data, plot_data_to_json(run.plot));
    if (config.plots) {
      summary.plot = report.output_dir / (stem + ".svg");
      emit_plot(run.plot, *summary.plot);
    }
    summary.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_start).count();
    report.rows.insert(report.rows.end(), run.rows.begin(), run.rows.end());
    report.cells.push_back(std::move(summary));
  }

  report.csv = report.output_dir / "samples.csv";
  write_file_atomic(report.csv, rows_to_csv(report.rows));
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.summary = report.output_dir / "summary.json";
  write_file_atomic(report.summary, summary_to_json(report));
  return report;
}

}  // namespace pcd
