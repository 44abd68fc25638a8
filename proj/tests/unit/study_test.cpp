#include "mipdg/study.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace mipdg {
namespace {

TEST(Orders, ExpectedSpatialOrderAlternates) {
  EXPECT_EQ(expected_spatial_order(1), 2);
  EXPECT_EQ(expected_spatial_order(2), 2);
  EXPECT_EQ(expected_spatial_order(3), 4);
  EXPECT_EQ(expected_spatial_order(4), 4);
  EXPECT_EQ(expected_spatial_order(5), 6);
}

TEST(Orders, HalvedStepsReduceToLog2Ratio) {
  EXPECT_NEAR(observed_order(1e-2, 2.5e-3, 0.2, 0.1), 2.0, 1e-12);
  EXPECT_NEAR(observed_order(8e-4, 1e-4, 1.0, 0.5), 3.0, 1e-12);
}

TEST(Orders, GeneralRatioUsesLogQuotient) {
  // Errors drop tenfold over a threefold step refinement.
  EXPECT_NEAR(observed_order(1e-3, 1e-4, 0.3, 0.1),
              std::log(10.0) / std::log(3.0), 1e-12);
}

TEST(StudyConfig, ValidationRejectsBadInput) {
  StudyConfig config;
  config.test = "test9";
  EXPECT_THROW(config.validate(), std::invalid_argument);

  config.test = "test1";
  config.mesh = {20, 10};
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.mesh = {10, 10};
  EXPECT_THROW(config.validate(), std::invalid_argument);

  config.mesh = {10, 20};
  config.degrees = {0};
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.degrees = {1};
  EXPECT_NO_THROW(config.validate());

  // Transient modes need a time-dependent case and a step rule.
  config.mode = StudyMode::forward;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.test = "test4";
  EXPECT_THROW(config.validate(), std::invalid_argument);  // no kappa_t, no dt
  config.kappa_t = 0.002;
  EXPECT_NO_THROW(config.validate());

  // A dt refinement study runs on one fixed mesh.
  config.dts = {0.1, 0.05};
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.mesh = {4};
  EXPECT_NO_THROW(config.validate());
}

TEST(RunStudy, EllipticTableMatchesReferenceAndIsDeterministic) {
  StudyConfig config;
  config.test = "test1";
  config.mode = StudyMode::elliptic;
  config.mesh = {10, 20};
  config.degrees = {1};
  config.penalty.gamma = {1.0, 1.1, 1.0};
  config.alpha = 2.0;

  const ConvergenceTable table = run_study(config);
  ASSERT_EQ(table.rows.size(), 4u);  // two meshes x {L2, Linf}
  EXPECT_EQ(table.step_label, "h");
  const TableRow& coarse = table.rows[0];
  const TableRow& fine = table.rows[1];
  EXPECT_TRUE(coarse.ok());
  EXPECT_NEAR(coarse.error, 2.9e-3, 1.5e-3);
  EXPECT_NEAR(fine.error, 7.3e-4, 4e-4);
  EXPECT_TRUE(std::isnan(coarse.order));
  EXPECT_NEAR(fine.order, 2.0, 0.2);

  std::ostringstream csv1, csv2;
  write_csv(table, csv1);
  write_csv(run_study(config), csv2);
  EXPECT_EQ(csv1.str(), csv2.str());
  EXPECT_NE(csv1.str().find("r,norm,h,error,order\n"), std::string::npos);
  EXPECT_NE(csv1.str().find("1,L2,0.1,"), std::string::npos);

  std::ostringstream md;
  write_markdown(table, md);
  EXPECT_NE(md.str().find("| r | norm | h | error | order |"),
            std::string::npos);
}

TEST(RunStudy, UnstableCellsAreMarkedNotFatal) {
  StudyConfig config;
  config.test = "test4";
  config.mode = StudyMode::forward;
  config.mesh = {4, 8};
  config.degrees = {3};
  config.alpha = 2.0;
  config.kappa_t = 0.01;  // past the explicit stability scale for r = 3

  const ConvergenceTable table = run_study(config);
  ASSERT_EQ(table.rows.size(), 4u);
  for (const TableRow& row : table.rows) {
    EXPECT_EQ(row.status, "unstable");
    EXPECT_TRUE(std::isnan(row.error));
  }
  std::ostringstream csv;
  write_csv(table, csv);
  EXPECT_NE(csv.str().find(",unstable,"), std::string::npos);
}

TEST(RunStudy, BackwardTimeStudyRefinesDt) {
  StudyConfig config;
  config.test = "test4";
  config.mode = StudyMode::backward;
  config.mesh = {4};
  config.degrees = {2};
  config.penalty.gamma = {1.0, 1.1, 1.0};
  config.alpha = 2.0;
  config.dts = {0.1, 0.05};

  const ConvergenceTable table = run_study(config);
  EXPECT_EQ(table.step_label, "dt");
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(table.rows[0].step, 0.1);
  EXPECT_DOUBLE_EQ(table.rows[1].step, 0.05);
  ASSERT_TRUE(table.rows[1].ok());
  // First-order time accuracy.
  EXPECT_NEAR(table.rows[1].order, 1.0, 0.2);
}

TEST(Selectivity, RecipesSteerTheBranch) {
  const std::vector<SelectivityCase> cases = {
      {4.0, GuessRecipe::blend_minus},
      {-4.0, GuessRecipe::blend_plus},
      {0.0, GuessRecipe::secant},
  };
  const auto rows = run_selectivity(cases);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].classification, "u+");
  EXPECT_LT(rows[0].l2_error, 1e-6);
  EXPECT_EQ(rows[1].classification, "u-");
  EXPECT_LT(rows[1].l2_error, 1e-6);
  EXPECT_EQ(rows[2].classification, "no-root");
  EXPECT_TRUE(std::isnan(rows[2].l2_error));

  std::ostringstream csv;
  write_selectivity_csv(rows, csv);
  EXPECT_NE(csv.str().find("alpha,guess,result,l2_error,iterations\n"),
            std::string::npos);
  EXPECT_NE(csv.str().find("0,secant,no-root,,"), std::string::npos);
}

TEST(PlotDump, TenSamplesPerElement) {
  auto space = std::make_shared<DGSpace>(Mesh::uniform(0.0, 1.0, 5), 1);
  DGFunction f = l2_project(space, [](double x) { return x; });
  std::ostringstream csv;
  write_plot_csv(f, [](double x) { return x; }, csv);

  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "x,u_h,exact");
  int count = 0;
  double last_x = -1.0;
  while (std::getline(lines, line)) {
    ++count;
    const double x = std::stod(line.substr(0, line.find(',')));
    EXPECT_GT(x, last_x);
    last_x = x;
  }
  EXPECT_EQ(count, 50);
}

}  // namespace
}  // namespace mipdg
