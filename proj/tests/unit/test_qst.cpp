#include <gtest/gtest.h>

#include <cmath>

#include "qmeta/qst.hpp"

using namespace qmeta;

TEST(PauliSettings, CountsAndLabels) {
  EXPECT_EQ(build_settings(1).size(), 3u);
  EXPECT_EQ(build_settings(2).size(), 15u);
  EXPECT_EQ(build_settings(3).size(), 63u);
  const auto s = build_settings(2);
  EXPECT_EQ(s.settings.front().label, "IX");
  EXPECT_EQ(s.settings.back().label, "ZZ");
  EXPECT_EQ(s.settings.front().projectors.size(), 2u);
  EXPECT_EQ(s.settings.back().projectors.size(), 4u);
}

TEST(PauliSettings, ProjectorsAreCompleteAndIdempotent) {
  for (int n = 1; n <= 3; ++n) {
    const auto s = build_settings(n);
    const auto dim = static_cast<Eigen::Index>(dimension_for(n));
    for (const auto& setting : s.settings) {
      Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
      for (const auto& p : setting.projectors) {
        sum += p;
        EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
      }
      EXPECT_LT((sum - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Frequencies, ExactModeAndShotAccounting) {
  const DensityMatrix zero = DensityMatrix::from_pure(StateVector::basis(1, 0));
  const auto s = build_settings(1);
  const FrequencyTable f = exact_frequencies(zero, s);
  // X and Y outcomes are even, Z is deterministic
  EXPECT_NEAR(f.freqs[0][0], 0.5, 1e-15);
  EXPECT_NEAR(f.freqs[1][1], 0.5, 1e-15);
  EXPECT_NEAR(f.freqs[2][0], 1.0, 1e-15);
  Rng rng(1);
  const FrequencyTable g = simulate_frequencies(zero, s, 777, rng);
  EXPECT_EQ(g.shots_per_setting, 777u);
  for (const auto& row : g.freqs) {
    double sum = 0.0;
    for (double x : row) {
      sum += x;
      // each frequency is an integer count over n
      EXPECT_NEAR(x * 777, std::round(x * 777), 1e-9);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_THROW(simulate_frequencies(zero, s, 0, rng), std::invalid_argument);
}

TEST(Frequencies, MaximallyMixedGivesHalves) {
  const auto s = build_settings(2);
  Rng rng(2);
  const std::uint64_t n = 10000;
  const FrequencyTable f = simulate_frequencies(DensityMatrix::maximally_mixed(2), s, n, rng);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = 1.0 / static_cast<double>(f.freqs[i].size());
    const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n));
    for (double x : f.freqs[i]) EXPECT_NEAR(x, p, 4 * sd);
  }
}

TEST(RrhoR, ExactFrequenciesFromTheTruthAreAFixedPoint) {
  Rng rng(3);
  const DensityMatrix rho = depolarize(haar_random_state(2, rng), 0.3);
  const auto s = build_settings(2);
  const RrhoRResult r = rrhor_estimate(exact_frequencies(rho, s), s, rho);
  EXPECT_LT((r.rho.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RrhoR, ConvergesToAPureStateFromExactData) {
  const DensityMatrix zero = DensityMatrix::from_pure(StateVector::basis(1, 0));
  const auto s = build_settings(1);
  RrhoROptions o;
  o.max_iters = 500;
  o.tol = 0.0;
  const RrhoRResult r =
      rrhor_estimate(exact_frequencies(zero, s), s, DensityMatrix::maximally_mixed(1), o);
  EXPECT_LE(r.iterations, 500);
  EXPECT_LT(infidelity(r.rho, StateVector::basis(1, 0)), 1e-6);
}

TEST(RrhoR, OutputIsPhysicalAndLikelihoodMonotone) {
  Rng rng(4);
  for (int instance = 0; instance < 50; ++instance) {
    const int n = 1 + instance % 2;
    const auto s = build_settings(n);
    const DensityMatrix truth = DensityMatrix::from_pure(haar_random_state(n, rng));
    const FrequencyTable f = simulate_frequencies(truth, s, 50 + 10 * instance, rng);
    const DensityMatrix init = instance % 3 == 0 ? random_initial_state(n, rng)
                                                 : DensityMatrix::maximally_mixed(n);
    RrhoROptions o;
    o.max_iters = 300;
    const RrhoRResult r = rrhor_estimate(f, s, init, o);
    for (std::size_t i = 1; i < r.loglik_trace.size(); ++i) {
      ASSERT_GE(r.loglik_trace[i] - r.loglik_trace[i - 1], -1e-10) << "instance " << instance;
    }
    ASSERT_EQ(r.loglik_trace.size(), static_cast<std::size_t>(r.iterations) + 1);
    EXPECT_NO_THROW(DensityMatrix(n, r.rho.matrix(), 1e-9));
    EXPECT_NEAR(r.loglik, log_likelihood(r.rho, f, s), 1e-12);
  }
}

TEST(RrhoR, RejectsBadOptions) {
  const auto s = build_settings(1);
  const auto f = exact_frequencies(DensityMatrix::maximally_mixed(1), s);
  RrhoROptions o;
  o.alpha = 1.0;
  EXPECT_THROW(rrhor_estimate(f, s, DensityMatrix::maximally_mixed(1), o), std::invalid_argument);
  EXPECT_THROW(rrhor_estimate(f, build_settings(2), DensityMatrix::maximally_mixed(2)),
               std::invalid_argument);
}

TEST(QstCsv, RowFormat) {
  const QstRow r{2, 1, 100, 300, 0.25, 12, -1.5};
  EXPECT_EQ(to_csv(r), "2,1,100,300,0.25,12,-1.5");
  EXPECT_EQ(qst_csv_header(),
            "instance,n_qubits,shots_per_setting,total_shots,infidelity,iterations,loglik");
}
