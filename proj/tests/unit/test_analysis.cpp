#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "qmeta/analysis.hpp"

using namespace qmeta;

namespace {

std::vector<std::pair<double, double>> power_law(double alpha, double beta) {
  std::vector<std::pair<double, double>> pts;
  for (double c : {10.0, 100.0, 1e3, 1e4, 3e4}) pts.emplace_back(c, alpha * std::pow(c, -beta));
  return pts;
}

}  // namespace

TEST(FitScaling, ExactPowerLaws) {
  const ScalingFit a = fit_scaling(power_law(10.0, 1.0));
  EXPECT_NEAR(a.beta, 1.0, 1e-9);
  EXPECT_NEAR(a.alpha, 10.0, 1e-9);
  EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
  EXPECT_EQ(a.n_points, 5);
  EXPECT_NEAR(fit_scaling(power_law(1.0, 0.75)).beta, 0.75, 1e-9);
}

TEST(FitScaling, InvariantUnderReorderingAndRescaling) {
  std::vector<std::pair<double, double>> pts{{12, 0.3}, {150, 0.02}, {900, 0.009}, {5e3, 0.0004}};
  const ScalingFit base = fit_scaling(pts);
  std::reverse(pts.begin(), pts.end());
  const ScalingFit rev = fit_scaling(pts);
  EXPECT_NEAR(rev.beta, base.beta, 1e-12);
  EXPECT_NEAR(rev.alpha, base.alpha, 1e-12 * base.alpha);
  for (auto& p : pts) p.first *= 37.0;
  const ScalingFit scaled = fit_scaling(pts);
  EXPECT_NEAR(scaled.beta, base.beta, 1e-9);
  EXPECT_GT(std::abs(scaled.alpha - base.alpha), 1e-3);
  EXPECT_LT(base.r_squared, 1.0);
}

TEST(FitScaling, Errors) {
  const std::vector<std::pair<double, double>> one{{1, 1}};
  EXPECT_THROW(fit_scaling(one), std::invalid_argument);
  const std::vector<std::pair<double, double>> neg{{1, 1}, {-2, 1}};
  EXPECT_THROW(fit_scaling(neg), std::invalid_argument);
  const std::vector<std::pair<double, double>> zero{{1, 1}, {2, 0}};
  EXPECT_THROW(fit_scaling(zero), std::invalid_argument);
  const std::vector<std::pair<double, double>> same_x{{3, 1}, {3, 2}};
  EXPECT_THROW(fit_scaling(same_x), std::invalid_argument);
}

TEST(Summary, SingleOutcomeAndErrors) {
  const std::vector<OutcomeRecord> one{{0, 1, 1, 0, 100, 250, 4, true, 0.02}};
  const Summary s = summarize(one);
  EXPECT_EQ(s.mean_c_total, 250.0);
  EXPECT_EQ(s.se_c_total, 0.0);
  EXPECT_EQ(s.halted_fraction, 1.0);
  EXPECT_THROW(summarize(std::vector<OutcomeRecord>{}), std::invalid_argument);
}

TEST(Summary, MeansStandardErrorsAndDelta) {
  std::vector<OutcomeRecord> xs;
  for (int c : {10, 20, 30, 40}) xs.push_back({0, 0, 1, 0, 100, static_cast<std::uint64_t>(c), c, c < 35, 0.1});
  const Summary s = summarize(xs);
  EXPECT_EQ(s.mean_c_total, 25.0);
  // sample sd of {10,20,30,40} is sqrt(500/3)
  EXPECT_NEAR(s.se_c_total, std::sqrt(500.0 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(s.halted_fraction, 0.75);
  EXPECT_EQ(delta_c_total(s, s), 0.0);
  Summary base, rl;
  base.mean_c_total = 3.6e4;
  rl.mean_c_total = 3.1e4;
  EXPECT_EQ(delta_c_total(base, rl), 5e3);
}

TEST(Readers, EvalCsvAndOutcomeRows) {
  const auto path = std::filesystem::temp_directory_path() / "qmeta_eval_test.csv";
  {
    std::ofstream out(path);
    write_eval_csv(out, {{10, 40.5, 0.1, 3.0, 1.0, 8}, {100, 400.25, 0.01, 30.0, 1.0, 8}});
  }
  const auto rows = read_eval_csv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].c_target, 100u);
  EXPECT_EQ(rows[1].mean_c_total, 400.25);
  EXPECT_EQ(rows[1].n, 8);
  std::filesystem::remove(path);

  std::vector<OutcomeRecord> xs{{0, 0, 1, 0, 100, 10, 1, true, 0.5},
                                {1, 0, 1, 0, 10, 3, 1, true, 0.25},
                                {2, 0, 1, 0, 100, 30, 1, true, 0.25}};
  const auto grouped = rows_from_outcomes(xs);
  ASSERT_EQ(grouped.size(), 2u);
  EXPECT_EQ(grouped[0].c_target, 10u);
  EXPECT_EQ(grouped[1].mean_c_total, 20.0);
  EXPECT_EQ(grouped[1].mean_infidelity, 0.375);
  EXPECT_NE(scaling_report(grouped, fit_scaling(grouped)).find("fit:"), std::string::npos);
}
