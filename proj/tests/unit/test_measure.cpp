#include <gtest/gtest.h>

#include <cmath>

#include "qmeta/measure.hpp"

using namespace qmeta;

TEST(SuccessCount, DegenerateProbabilities) {
  Rng rng(1);
  const auto zero = sample_success_count(0.0, 100, rng);
  EXPECT_EQ(zero.count, 0u);
  EXPECT_FALSE(zero.capped);
  const auto one = sample_success_count(1.0, 100, rng);
  EXPECT_EQ(one.count, 100u);
  EXPECT_TRUE(one.capped);
}

TEST(SuccessCount, RejectsBadArguments) {
  Rng rng(1);
  EXPECT_THROW(sample_success_count(0.5, 0, rng), std::invalid_argument);
  EXPECT_THROW(sample_success_count(1.5, 10, rng), std::invalid_argument);
  EXPECT_THROW(sample_success_count(-0.1, 10, rng), std::invalid_argument);
}

TEST(SuccessCount, NeverExceedsCap) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_success_count(0.999, 50, rng);
    ASSERT_LE(s.count, 50u);
    ASSERT_EQ(s.capped, s.count == 50u);
  }
}

TEST(SuccessCount, ClosedFormAndShotByShotAgreeInDistribution) {
  Rng a(3), b(4);
  const double p = 0.8;
  const int n = 50000;
  double ma = 0.0, mb = 0.0;
  for (int i = 0; i < n; ++i) {
    ma += static_cast<double>(sample_success_count(p, 1'000'000, a).count);
    mb += static_cast<double>(sample_success_count(p, 1'000'000, b, SamplingMode::shot_by_shot).count);
  }
  const double mean = p / (1 - p);
  const double se = std::sqrt(p) / (1 - p) / std::sqrt(n);
  EXPECT_NEAR(ma / n, mean, 4 * se);
  EXPECT_NEAR(mb / n, mean, 4 * se);
}

TEST(Ledger, CountsSuccessesAndUncappedFails) {
  ShotLedger l;
  l.record({5, false});
  l.record({10, true});
  l.record({0, false});
  EXPECT_EQ(l.total_success(), 15u);
  EXPECT_EQ(l.total_fail(), 2u);
}

TEST(SuccessProbability, PureAndMixedAgreeForPureInput) {
  Rng rng(5);
  const HeaSpec s = HeaSpec::for_qubits(2, 1);
  const StateVector psi = haar_random_state(2, rng);
  const ParamVector th = random_params(s, rng);
  const double p_pure = success_probability(psi, s, th, 0);
  const double p_mixed = success_probability(DensityMatrix::from_pure(psi), s, th, 0);
  EXPECT_NEAR(p_pure, p_mixed, 1e-13);
  EXPECT_NEAR(p_pure, std::norm(apply_hea(s, th, psi)[0]), 1e-15);
}

TEST(SuccessProbability, MaximallyMixedIsUniform) {
  Rng rng(6);
  const HeaSpec s = HeaSpec::for_qubits(3, 2);
  EXPECT_NEAR(success_probability(DensityMatrix::maximally_mixed(3), s, random_params(s, rng), 5),
              1.0 / 8.0, 1e-14);
}

TEST(CircuitEnvironment, LedgerTracksEveryMeasurement) {
  Rng rng(7);
  const HeaSpec s = HeaSpec::for_qubits(1, 0);
  CircuitEnvironment env(haar_random_state(1, rng), s, 0, 1000);
  std::uint64_t sum = 0;
  for (int i = 0; i < 20; ++i) sum += env.measure(random_params(s, rng), rng).count;
  EXPECT_EQ(env.ledger().total_success(), sum);
  env.reset_ledger();
  EXPECT_EQ(env.ledger().total_success(), 0u);
}
