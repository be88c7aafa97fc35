// Command-line front end over the C API.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcd/pcd.h"

namespace {

struct Table {
  std::vector<double> values;  // row-major, two columns
  std::size_t rows() const { return values.size() / 2; }
};

[[noreturn]] void die(const std::string& what, int code = 1) {
  std::cerr << "pcd: " << what << "\n";
  std::exit(code);
}

void check(pcd_status s) {
  if (s != PCD_OK) die(std::string(pcd_status_name(s)) + ": " + pcd_last_error(), 2);
}

// Two numeric columns per line; a non-numeric first line is a header.
Table read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) die("cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double x, y;
    std::string rest;
    if (!(fields >> x >> y)) {
      if (lineno == 1) continue;
      die(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    if (fields >> rest) die(path + ":" + std::to_string(lineno) + ": expected two columns");
    t.values.push_back(x);
    t.values.push_back(y);
  }
  return t;
}

std::string points_to_csv(const double* data, std::size_t rows) {
  std::string out = "x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < rows; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", data[2 * i], data[2 * i + 1]);
    out += buf;
  }
  return out;
}

void print_summary(const std::string& summary_json) {
  const auto j = nlohmann::json::parse(summary_json);
  std::printf("%s / %s / %s, %llu rows in %.2f s\n",
              j["scenario"].get<std::string>().c_str(),
              j["sampler"].get<std::string>().c_str(),
              j["coupling"].get<std::string>().c_str(),
              static_cast<unsigned long long>(j["total_rows"].get<std::uint64_t>()),
              j["wall_clock_seconds"].get<double>());
  std::printf("%5s %10s %6s %14s %14s %14s %14s %14s %8s\n", "cell", "gamma", "SU", "RS",
              "CS", "overlap", "DA", "DTW", "nonconv");
  for (const auto& c : j["cells"]) {
    const auto& m = c["metrics"];
    auto pm = [&](const char* k) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f±%.3f", m[k]["mean"].get<double>(),
                    m[k]["std"].get<double>());
      return std::string(buf);
    };
    std::printf("%5llu %10.4g %6.3f %14s %14s %14s %14s %14s %8llu\n",
                static_cast<unsigned long long>(c["cell"].get<std::uint64_t>()),
                c["gamma"].get<double>(), c["success_rate"].get<double>(), pm("rs").c_str(),
                pm("cs").c_str(), pm("overlap").c_str(), pm("da_proxy").c_str(),
                pm("dtw").c_str(),
                static_cast<unsigned long long>(c["nonconverged_projections"].get<std::uint64_t>()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected coupled diffusion sampler"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Override the configured master seed");

  auto* run = app.add_subcommand("run", "Execute an experiment configuration");
  std::string config_path, output_dir;
  std::optional<unsigned> workers;
  run->add_option("config", config_path, "JSON run configuration")->required();
  run->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
  run->add_option("--output-dir", output_dir, "Override the configured output directory");
  run->add_option("--seed", seed, "Override the configured master seed");

  auto* project = app.add_subcommand(
      "project", "Project a trajectory onto the velocity-chain constraint set");
  std::string input, output;
  double v_max = 0.0, dt = 1.0;
  pcd_admm_options admm;
  pcd_admm_default_options(&admm);
  project->add_option("--input", input, "CSV of waypoints; the first row is the fixed start")
      ->required();
  project->add_option("--vmax", v_max, "Maximum speed")->required();
  project->add_option("--dt", dt, "Time step")->required();
  project->add_option("--output", output, "Output CSV (default: stdout)");
  project->add_option("--penalty", admm.penalty, "ADMM penalty");
  project->add_option("--max-iterations", admm.max_iterations, "ADMM iteration cap");
  project->add_option("--tolerance", admm.tolerance, "ADMM residual tolerance");

  auto* metrics = app.add_subcommand("metrics", "DTW and discrete Frechet distance");
  std::string path_a, path_b;
  metrics->add_option("--a", path_a, "First trajectory CSV")->required();
  metrics->add_option("--b", path_b, "Second trajectory CSV")->required();

  auto* plot = app.add_subcommand("plot", "Render a run cell's plot data as SVG");
  std::string cell_path, svg_path;
  plot->add_option("cell", cell_path, "cell_<i>.json written by run")->required();
  plot->add_option("--output", svg_path, "SVG path (default: next to the cell file)");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    pcd_config* config = nullptr;
    check(pcd_config_load(config_path.c_str(), &config));
    if (seed) check(pcd_config_set_seed(config, *seed));
    if (workers) check(pcd_config_set_workers(config, *workers));
    if (!output_dir.empty()) check(pcd_config_set_output_dir(config, output_dir.c_str()));
    pcd_report* report = nullptr;
    const pcd_status s = pcd_execute(config, &report);
    pcd_config_free(config);
    check(s);
    print_summary(pcd_report_summary_json(report));
    std::printf("wrote %s\n", pcd_report_output_dir(report));
    pcd_report_free(report);
    return 0;
  }

  if (*project) {
    const Table t = read_points(input);
    if (t.rows() < 2) die("'" + input + "' needs a start row and at least one waypoint");
    const std::size_t H = t.rows() - 1;
    std::vector<double> out(2 * t.rows());
    out[0] = t.values[0];
    out[1] = t.values[1];
    pcd_projection_info info{};
    check(pcd_project_velocity_chain(t.values.data() + 2, H, t.values[0], t.values[1], v_max,
                                     dt, &admm, out.data() + 2, &info));
    const std::string csv = points_to_csv(out.data(), t.rows());
    if (output.empty()) {
      std::cout << csv;
    } else {
      std::ofstream f(output);
      if (!(f << csv)) die("cannot write '" + output + "'");
    }
    std::cerr << "admm: " << (info.converged ? "converged" : "not converged") << " after "
              << info.iterations << " iterations, residual " << info.residual << "\n";
    return info.converged ? 0 : 3;
  }

  if (*metrics) {
    const Table a = read_points(path_a);
    const Table b = read_points(path_b);
    double dtw = 0.0, dfd = 0.0;
    check(pcd_dtw(a.values.data(), a.rows(), b.values.data(), b.rows(), 2, &dtw));
    check(pcd_dfd(a.values.data(), a.rows(), b.values.data(), b.rows(), 2, &dfd));
    std::printf("dtw,dfd\n%.17g,%.17g\n", dtw, dfd);
    return 0;
  }

  if (*plot) {
    if (svg_path.empty()) {
      svg_path = cell_path;
      const auto dot = svg_path.rfind('.');
      const auto slash = svg_path.rfind('/');
      if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        svg_path.erase(dot);
      svg_path += ".svg";
    }
    check(pcd_plot_cell(cell_path.c_str(), svg_path.c_str()));
    std::printf("wrote %s\n", svg_path.c_str());
    return 0;
  }
  return 0;
}
