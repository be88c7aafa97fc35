#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pcd/pcd.h"
#include "temp_dir.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(pcd_version(), "0.1.0");
  EXPECT_STREQ(pcd_status_name(PCD_OK), "ok");
  EXPECT_STRNE(pcd_status_name(PCD_ERR_DOMAIN), pcd_status_name(PCD_ERR_IO));
  EXPECT_STREQ(pcd_status_name(static_cast<pcd_status>(99)), "unknown status");
}

TEST(CApi, ProjectionMatchesKnownSolution) {
  const double x_hat[] = {2, 0, 4, 0};
  double out[4];
  pcd_projection_info info{};
  ASSERT_EQ(pcd_project_velocity_chain(x_hat, 2, 0, 0, 1, 1, nullptr, out, &info), PCD_OK);
  EXPECT_STREQ(pcd_last_error(), "");
  EXPECT_EQ(info.converged, 1);
  EXPECT_NEAR(out[0], 1.0, 1e-4);
  EXPECT_NEAR(out[2], 2.0, 1e-4);
  int ok = 0;
  ASSERT_EQ(pcd_constraint_satisfaction(out, 2, 0, 0, 1, 1, &ok), PCD_OK);
  EXPECT_EQ(ok, 1);
  ASSERT_EQ(pcd_constraint_satisfaction(x_hat, 2, 0, 0, 1, 1, &ok), PCD_OK);
  EXPECT_EQ(ok, 0);
}

TEST(CApi, ProjectionInPlaceAndOptions) {
  double x[] = {3, 4};
  pcd_admm_options opt;
  pcd_admm_default_options(&opt);
  EXPECT_EQ(opt.penalty, 10.0);
  EXPECT_EQ(opt.max_iterations, 700);
  EXPECT_EQ(opt.tolerance, 2e-5);
  ASSERT_EQ(pcd_project_velocity_chain(x, 1, 0, 0, 1, 1, &opt, x, nullptr), PCD_OK);
  EXPECT_NEAR(x[0], 0.6, 1e-6);
  EXPECT_NEAR(x[1], 0.8, 1e-6);
}

TEST(CApi, BatchOfOneMatchesSingle) {
  const double x_hat[] = {1, 2, 3, 1, 5, -2};
  double single[6], batch[6];
  ASSERT_EQ(pcd_project_velocity_chain(x_hat, 3, 0, 0, 0.8, 1, nullptr, single, nullptr),
            PCD_OK);
  ASSERT_EQ(pcd_project_velocity_chain_batch(x_hat, 1, 3, 0, 0, 0.8, 1, nullptr, batch, nullptr),
            PCD_OK);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(single[i], batch[i]);
}

TEST(CApi, ErrorsSetStatusAndMessage) {
  double out[2];
  EXPECT_EQ(pcd_project_velocity_chain(nullptr, 1, 0, 0, 1, 1, nullptr, out, nullptr),
            PCD_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(pcd_last_error(), "");
  const double x[] = {1, 1};
  EXPECT_EQ(pcd_project_velocity_chain(x, 0, 0, 0, 1, 1, nullptr, out, nullptr),
            PCD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(pcd_project_velocity_chain(x, 1, 0, 0, -1, 1, nullptr, out, nullptr),
            PCD_ERR_INVALID_ARGUMENT);
  double d = 0;
  EXPECT_EQ(pcd_dtw(x, 0, x, 1, 2, &d), PCD_ERR_INVALID_ARGUMENT);
  // A successful call clears the message.
  EXPECT_EQ(pcd_dtw(x, 1, x, 1, 2, &d), PCD_OK);
  EXPECT_STREQ(pcd_last_error(), "");
  pcd_config* cfg = nullptr;
  EXPECT_EQ(pcd_config_parse("{\"scenario\": \"corridor\", \"gama\": 1}", &cfg),
            PCD_ERR_CONFIGURATION);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(pcd_last_error()).find("gama"), std::string::npos);
  EXPECT_EQ(pcd_config_load("/nonexistent/run.json", &cfg), PCD_ERR_IO);
  EXPECT_EQ(pcd_execute(nullptr, nullptr), PCD_ERR_INVALID_ARGUMENT);
}

TEST(CApi, LastErrorIsThreadLocal) {
  pcd_config* cfg = nullptr;
  ASSERT_EQ(pcd_config_parse("{", &cfg), PCD_ERR_CONFIGURATION);
  std::string other;
  std::thread([&] { other = pcd_last_error(); }).join();
  EXPECT_EQ(other, "");
  EXPECT_STRNE(pcd_last_error(), "");
}

TEST(CApi, Distances) {
  const double a[] = {0, 0, 0, 0}, b[] = {0, 0, 0, 1};
  double d = -1;
  ASSERT_EQ(pcd_dfd(a, 2, b, 2, 2, &d), PCD_OK);
  EXPECT_EQ(d, 1.0);
  const double s[] = {0}, t[] = {3};
  ASSERT_EQ(pcd_dtw(s, 1, t, 1, 1, &d), PCD_OK);
  EXPECT_EQ(d, 3.0);
}

TEST(CApi, RunLifecycle) {
  pcd::test::TempDir dir;
  pcd_config* cfg = nullptr;
  ASSERT_EQ(pcd_config_parse(R"({"scenario": "corridor", "gamma": [0, 2], "batch_size": 8})",
                             &cfg),
            PCD_OK);
  size_t cells = 0;
  ASSERT_EQ(pcd_config_cell_count(cfg, &cells), PCD_OK);
  EXPECT_EQ(cells, 2u);
  ASSERT_EQ(pcd_config_set_seed(cfg, 17), PCD_OK);
  ASSERT_EQ(pcd_config_set_workers(cfg, 2), PCD_OK);
  ASSERT_EQ(pcd_config_set_output_dir(cfg, dir.path().c_str()), PCD_OK);
  pcd_report* report = nullptr;
  ASSERT_EQ(pcd_execute(cfg, &report), PCD_OK) << pcd_last_error();
  EXPECT_EQ(pcd_report_row_count(report), 16u);
  EXPECT_EQ(std::string(pcd_report_output_dir(report)), dir.path().string());
  const std::string csv = pcd_report_csv_path(report);
  EXPECT_EQ(slurp(csv).rfind("cell,gamma,", 0), 0u);
  EXPECT_NE(std::string(pcd_report_summary_json(report)).find("\"seed\": 17"),
            std::string::npos);
  const std::string svg = (dir.path() / "replot.svg").string();
  ASSERT_EQ(pcd_plot_cell((dir.path() / "cell_1.json").c_str(), svg.c_str()), PCD_OK);
  EXPECT_EQ(slurp(svg), slurp((dir.path() / "cell_1.svg").string()));
  EXPECT_EQ(pcd_plot_cell((dir.path() / "missing.json").c_str(), svg.c_str()), PCD_ERR_IO);
  pcd_report_free(report);
  pcd_config_free(cfg);
  pcd_report_free(nullptr);
  pcd_config_free(nullptr);
}

}  // namespace
