#pragma once

// Dense state-vector and density-matrix simulation for small qubit counts.
//
// Basis ordering: qubit 0 is the most significant bit of the basis index, so
// |q0 q1 ... q_{N-1}> has index sum_j q_j 2^(N-1-j).

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmeta/rng.hpp"

namespace qmeta {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 12;

std::size_t dimension_for(int n_qubits);

class StateVector {
 public:
  /// Validates length 2^n and unit norm (1e-10).
  StateVector(int n_qubits, std::vector<Complex> amplitudes);

  static StateVector basis(int n_qubits, std::size_t index);
  /// Normalizes `amplitudes` before validating; rejects the zero vector.
  static StateVector normalized(int n_qubits, std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
  double norm() const;

 private:
  int n_qubits_;
  std::vector<Complex> amplitudes_;
};

Complex inner(const StateVector& a, const StateVector& b);  // <a|b>

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and PSD within `tol`.
  DensityMatrix(int n_qubits, Eigen::MatrixXcd entries, double tol = 1e-10);

  static DensityMatrix from_pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return entries_; }

  double purity() const;
  /// <phi| rho |phi>, real part.
  double expectation(const StateVector& phi) const;

 private:
  int n_qubits_;
  Eigen::MatrixXcd entries_;
};

enum class Entangler { none, nearest_neighbor_chain };

/// Layered hardware-efficient ansatz: a column of U3 gates, then `n_layers`
/// repetitions of (CNOT chain on (i, i+1); U3 column). A single qubit uses one
/// U3 gate and no entangler.
struct HeaSpec {
  int n_qubits = 1;
  int n_layers = 0;
  Entangler entangler = Entangler::none;

  static HeaSpec for_qubits(int n_qubits, int n_layers);

  std::size_t param_count() const;
  std::size_t dim() const { return dimension_for(n_qubits); }
  void validate() const;
};

struct ParamVector {
  std::vector<double> angles;

  ParamVector() = default;
  explicit ParamVector(std::size_t n, double value = 0.0) : angles(n, value) {}
  explicit ParamVector(std::vector<double> a) : angles(std::move(a)) {}

  std::size_t size() const { return angles.size(); }
  double& operator[](std::size_t i) { return angles[i]; }
  double operator[](std::size_t i) const { return angles[i]; }
  bool operator==(const ParamVector&) const = default;
};

/// Angles drawn uniformly from [-pi, pi).
ParamVector random_params(const HeaSpec& spec, Rng& rng);

/// 2x2 matrix exp(i theta . sigma / 2), row-major {a, b, c, d}.
std::array<Complex, 4> u3_matrix(double tx, double ty, double tz);

/// Haar-random pure state: first column of a Haar unitary built by QR of a
/// complex Ginibre matrix with the R-diagonal phase correction.
StateVector haar_random_state(int n_qubits, Rng& rng);
/// Full Haar unitary, same construction.
Eigen::MatrixXcd haar_random_unitary(std::size_t dim, Rng& rng);

/// In-place U(theta) on a raw amplitude buffer of length 2^N.
void apply_hea_inplace(const HeaSpec& spec, const ParamVector& params, std::span<Complex> amps);
/// In-place U(theta)^dagger.
void apply_hea_adjoint_inplace(const HeaSpec& spec, const ParamVector& params,
                               std::span<Complex> amps);

StateVector apply_hea(const HeaSpec& spec, const ParamVector& params, const StateVector& input);
StateVector apply_hea_adjoint(const HeaSpec& spec, const ParamVector& params,
                              const StateVector& input);

/// Dense matrix of U(theta), built column by column.
Eigen::MatrixXcd hea_unitary(const HeaSpec& spec, const ParamVector& params);

/// U^dagger(theta_trained) |s>.
StateVector reconstruct_state(const HeaSpec& spec, const ParamVector& params_trained,
                              std::size_t success_basis_index);

/// 1 - |<target|estimate>|^2.
double infidelity(const StateVector& target, const StateVector& estimate);
/// 1 - <estimate| rho |estimate>.
double infidelity(const DensityMatrix& target, const StateVector& estimate);

/// (1 - mu) |psi><psi| + mu I / 2^N.
DensityMatrix depolarize(const StateVector& psi, double mu);

/// 32x32 Shen-Castan matrix exp[-(|m-16.5| + |n-16.5| + 1)/10], trace-normalized.
DensityMatrix shen_castan_state();
/// The constant K that makes the Shen-Castan matrix unit-trace.
double shen_castan_normalization();

/// 2x2 reduced state of one qubit.
Eigen::Matrix2cd reduced_qubit_state(const DensityMatrix& rho, int qubit_index);
/// Von Neumann entropy in bits of the single-qubit reduced state.
double subsystem_entropy(const DensityMatrix& rho, int qubit_index);

/// Largest |(U^dagger U - I)_{ij}|.
double unitarity_defect(const Eigen::MatrixXcd& u);

}  // namespace qmeta
