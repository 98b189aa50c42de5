#pragma once

// Maximum-likelihood tomography from Pauli-basis measurements with the
// RrhoR fixed-point iteration.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmeta/qsim.hpp"
#include "qmeta/rng.hpp"

namespace qmeta {

/// One tensor-product Pauli setting: per qubit 'I', 'X', 'Y' or 'Z'.
/// Outcomes are the sign patterns over the non-identity qubits; outcome bit j
/// (from the most significant end) is 1 for the -1 eigenvalue of the j-th
/// measured qubit. Unmeasured qubits contribute an identity factor.
struct PauliSetting {
  std::string label;
  std::vector<Eigen::MatrixXcd> projectors;
};

struct PauliSettings {
  int n_qubits = 1;
  std::vector<PauliSetting> settings;

  std::size_t size() const { return settings.size(); }
};

/// The 4^N - 1 settings, in base-4 order of labels over {I, X, Y, Z}
/// with qubit 0 most significant, the all-identity label removed.
PauliSettings build_settings(int n_qubits);

struct FrequencyTable {
  std::vector<std::vector<double>> freqs;  // [setting][outcome], each row sums to 1
  std::uint64_t shots_per_setting = 0;     // 0 for exact probabilities
};

/// Born probabilities Tr(rho Pi) for every outcome of every setting.
FrequencyTable exact_frequencies(const DensityMatrix& rho, const PauliSettings& settings);
/// n_shots categorical draws per setting.
FrequencyTable simulate_frequencies(const DensityMatrix& rho, const PauliSettings& settings,
                                    std::uint64_t n_shots, Rng& rng);

struct RrhoROptions {
  double alpha = 0.5;
  int max_iters = 5000;
  double tol = 1e-10;
  double p_floor = 1e-12;
};

struct RrhoRResult {
  DensityMatrix rho;
  int iterations = 0;              // accepted iterations
  double loglik = 0.0;
  std::vector<double> loglik_trace;  // initial value, then one entry per accepted iteration
  bool converged = false;
  std::uint64_t floored_probabilities = 0;  // p_i clamped to p_floor while f_i > 0
};

/// sum_i f_i log max(p_i, p_floor) over all settings and outcomes.
double log_likelihood(const DensityMatrix& rho, const FrequencyTable& freqs,
                      const PauliSettings& settings, double p_floor = 1e-12);

/// rho <- alpha rho + (1 - alpha) R rho R / Tr(R rho R). A step that would lower
/// the likelihood is retried with stronger damping; the iteration stops when
/// the likelihood gain drops below tol or no damped step improves it.
RrhoRResult rrhor_estimate(const FrequencyTable& freqs, const PauliSettings& settings,
                           const DensityMatrix& init, const RrhoROptions& options = {});

/// Full-rank start state from a random Pauli vector, clipped to the PSD cone.
DensityMatrix random_initial_state(int n_qubits, Rng& rng);

struct QstRow {
  std::uint64_t instance = 0;
  int n_qubits = 1;
  std::uint64_t shots_per_setting = 0;
  std::uint64_t total_shots = 0;
  double infidelity = 0.0;
  int iterations = 0;
  double loglik = 0.0;
};

std::string qst_csv_header();
std::string to_csv(const QstRow& row);

}  // namespace qmeta
