#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmeta/qsim.hpp"

using namespace qmeta;

TEST(StateVector, ValidatesLengthAndNorm) {
  EXPECT_THROW(StateVector(1, {Complex(1), Complex(0), Complex(0)}), std::invalid_argument);
  EXPECT_THROW(StateVector(1, {Complex(1), Complex(1)}), std::invalid_argument);
  EXPECT_NO_THROW(StateVector(1, {Complex(0), Complex(0, 1)}));
  EXPECT_THROW(StateVector::normalized(1, {Complex(0), Complex(0)}), std::invalid_argument);
  EXPECT_THROW(StateVector::basis(2, 4), std::out_of_range);
}

TEST(DensityMatrix, RejectsNonPhysical) {
  Eigen::MatrixXcd m(2, 2);
  m << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix(1, m), std::invalid_argument);
  m << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW(DensityMatrix(1, m), std::invalid_argument);
  m << 0.6, 0, 0, 0.6;
  EXPECT_THROW(DensityMatrix(1, m), std::invalid_argument);
}

TEST(Hea, ParameterCountIsThreeNTimesLayersPlusOne) {
  const std::pair<int, int> rows[] = {{1, 0}, {2, 1}, {3, 5}, {4, 10}, {5, 10}};
  for (auto [n, l] : rows) {
    EXPECT_EQ(HeaSpec::for_qubits(n, l).param_count(), static_cast<std::size_t>(3 * n * (l + 1)));
  }
}

TEST(Hea, SingleQubitIsOneU3) {
  const HeaSpec s = HeaSpec::for_qubits(1, 7);
  EXPECT_EQ(s.n_layers, 0);
  EXPECT_EQ(s.param_count(), 3u);
}

TEST(Hea, U3MatchesMatrixExponential) {
  // expm(i (0.3 X - 1.2 Y + 0.7 Z) / 2), evaluated independently
  const auto u = u3_matrix(0.3, -1.2, 0.7);
  EXPECT_NEAR(u[0].real(), 0.7579487739883151, 1e-14);
  EXPECT_NEAR(u[0].imag(), 0.3212766084405213, 1e-14);
  EXPECT_NEAR(u[1].real(), -0.5507599001837508, 1e-14);
  EXPECT_NEAR(u[1].imag(), 0.13768997504593772, 1e-14);
  EXPECT_NEAR(u[2].real(), 0.5507599001837509, 1e-14);
  EXPECT_NEAR(u[3].imag(), -0.32127660844052136, 1e-14);
}

TEST(Hea, TwoQubitOneLayerMatchesReference) {
  // U = (U3 x U3) CNOT_{0->1} (U3 x U3), qubit 0 most significant
  const ParamVector th({0.3, -1.2, 0.7, 2.1, 0.4, -0.5, -0.9, 1.5, 0.2, 0.6, -2.0, 1.1});
  const Eigen::MatrixXcd u = hea_unitary(HeaSpec::for_qubits(2, 1), th);
  EXPECT_NEAR(u(0, 0).real(), 0.0030797352468293626, 1e-13);
  EXPECT_NEAR(u(0, 0).imag(), 0.09436266202198423, 1e-13);
  EXPECT_NEAR(u(1, 2).real(), -0.1793541333206328, 1e-13);
  EXPECT_NEAR(u(1, 2).imag(), 0.15858672309054705, 1e-13);
  EXPECT_NEAR(u(3, 1).real(), 0.47630536453854366, 1e-13);
  EXPECT_NEAR(u(3, 1).imag(), -0.09540559616668529, 1e-13);
  EXPECT_NEAR(u(2, 3).real(), -0.5445680410926692, 1e-13);
  EXPECT_NEAR(u(2, 3).imag(), -0.04367895036604963, 1e-13);
}

TEST(Hea, RandomInstancesAreUnitary) {
  Rng rng(1);
  for (int n = 1; n <= 4; ++n) {
    const HeaSpec s = HeaSpec::for_qubits(n, n == 1 ? 0 : 3);
    for (int i = 0; i < 10; ++i) {
      EXPECT_LT(unitarity_defect(hea_unitary(s, random_params(s, rng))), 1e-12);
    }
  }
}

TEST(Hea, AdjointInvertsForward) {
  Rng rng(2);
  const HeaSpec s = HeaSpec::for_qubits(3, 2);
  const ParamVector th = random_params(s, rng);
  const StateVector psi = haar_random_state(3, rng);
  const StateVector back = apply_hea_adjoint(s, th, apply_hea(s, th, psi));
  EXPECT_LT(infidelity(psi, back), 1e-13);
  EXPECT_NEAR(std::abs(inner(psi, back)), 1.0, 1e-13);
}

TEST(Hea, ParamLengthMismatchThrows) {
  const HeaSpec s = HeaSpec::for_qubits(2, 1);
  EXPECT_THROW(apply_hea(s, ParamVector(3), StateVector::basis(2, 0)), std::invalid_argument);
}

TEST(Hea, ReconstructionOfPerfectlyTrainedCircuitIsExact) {
  Rng rng(4);
  const HeaSpec s = HeaSpec::for_qubits(1, 0);
  const ParamVector th = random_params(s, rng);
  const StateVector target = reconstruct_state(s, th, 0);
  // U(th)|target> = |0>, so the success probability is one
  const StateVector out = apply_hea(s, th, target);
  EXPECT_NEAR(std::norm(out[0]), 1.0, 1e-13);
}

TEST(Haar, StatesAreNormalizedAndUniformOnTheBlochSphere) {
  Rng rng(5);
  const int n = 20000;
  double mean_z = 0.0, mean_p0 = 0.0, mean_p0_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const StateVector psi = haar_random_state(1, rng);
    ASSERT_NEAR(psi.norm(), 1.0, 1e-12);
    const double p0 = std::norm(psi[0]);
    mean_z += 2 * p0 - 1;
    mean_p0 += p0;
    mean_p0_sq += p0 * p0;
  }
  // |<0|psi>|^2 is uniform on [0, 1] for Haar qubits: mean 1/2, second moment 1/3
  EXPECT_NEAR(mean_z / n, 0.0, 0.02);
  EXPECT_NEAR(mean_p0 / n, 0.5, 0.01);
  EXPECT_NEAR(mean_p0_sq / n, 1.0 / 3.0, 0.01);
}

TEST(Haar, UnitaryIsUnitary) {
  Rng rng(6);
  EXPECT_LT(unitarity_defect(haar_random_unitary(8, rng)), 1e-12);
}

TEST(Infidelity, KnownValues) {
  const StateVector zero = StateVector::basis(1, 0);
  const StateVector one = StateVector::basis(1, 1);
  const StateVector plus = StateVector::normalized(1, {Complex(1), Complex(1)});
  EXPECT_NEAR(infidelity(zero, zero), 0.0, 1e-15);
  EXPECT_NEAR(infidelity(zero, one), 1.0, 1e-15);
  EXPECT_NEAR(infidelity(zero, plus), 0.5, 1e-15);
}

TEST(Depolarize, FloorIsMuTimesOneMinusInverseDimension) {
  Rng rng(8);
  for (int n = 1; n <= 3; ++n) {
    const StateVector psi = haar_random_state(n, rng);
    const double mu = 0.01;
    const DensityMatrix rho = depolarize(psi, mu);
    const double d = static_cast<double>(dimension_for(n));
    EXPECT_NEAR(infidelity(rho, psi), mu * (1.0 - 1.0 / d), 1e-14);
  }
  EXPECT_THROW(depolarize(StateVector::basis(1, 0), 1.5), std::invalid_argument);
}

TEST(ShenCastan, PureAndMatchesReferenceEntropies) {
  const DensityMatrix rho = shen_castan_state();
  EXPECT_EQ(rho.n_qubits(), 5);
  EXPECT_NEAR(rho.purity(), 1.0, 1e-12);
  // reference values from an independent partial trace of the same matrix
  const double expected[] = {0.6406752075965046, 0.5467843162078669, 0.2306925111582623,
                             0.07970395881911281, 0.025122196697645514};
  for (int q = 0; q < 5; ++q) EXPECT_NEAR(subsystem_entropy(rho, q), expected[q], 1e-10);
}

TEST(ShenCastan, NormalizationConstant) {
  // trace of exp[-(|m-16.5| + |n-16.5| + 1)/10] over the diagonal
  double tr = 0.0;
  for (int m = 1; m <= 32; ++m) tr += std::exp(-(2.0 * std::abs(m - 16.5) + 1.0) / 10.0);
  EXPECT_NEAR(shen_castan_normalization(), tr, 1e-12);
}

TEST(ReducedState, ProductStateEntropyIsZero) {
  const DensityMatrix rho = DensityMatrix::from_pure(StateVector::basis(3, 5));
  for (int q = 0; q < 3; ++q) EXPECT_NEAR(subsystem_entropy(rho, q), 0.0, 1e-12);
  const Eigen::Matrix2cd r0 = reduced_qubit_state(rho, 0);  // |101>: qubit 0 is |1>
  EXPECT_NEAR(r0(1, 1).real(), 1.0, 1e-14);
}

TEST(ReducedState, BellStateEntropyIsOneBit) {
  const StateVector bell = StateVector::normalized(2, {Complex(1), 0, 0, Complex(1)});
  EXPECT_NEAR(subsystem_entropy(DensityMatrix::from_pure(bell), 0), 1.0, 1e-12);
}
