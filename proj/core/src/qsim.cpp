#include "qmeta/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qmeta {

namespace {

void check_qubits(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                                "], got " + std::to_string(n_qubits));
  }
}

void apply_1q(std::span<Complex> amps, int n_qubits, int qubit, const std::array<Complex, 4>& m) {
  const std::size_t stride = std::size_t{1} << (n_qubits - 1 - qubit);
  const std::size_t dim = amps.size();
  for (std::size_t block = 0; block < dim; block += 2 * stride) {
    for (std::size_t i = block; i < block + stride; ++i) {
      const Complex a0 = amps[i];
      const Complex a1 = amps[i + stride];
      amps[i] = m[0] * a0 + m[1] * a1;
      amps[i + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

void apply_cnot(std::span<Complex> amps, int n_qubits, int control, int target) {
  const std::size_t cbit = std::size_t{1} << (n_qubits - 1 - control);
  const std::size_t tbit = std::size_t{1} << (n_qubits - 1 - target);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(amps[i], amps[i | tbit]);
  }
}

void apply_u3_column(const HeaSpec& spec, const ParamVector& p, int column, bool adjoint,
                     std::span<Complex> amps) {
  const int n = spec.n_qubits;
  for (int q = 0; q < n; ++q) {
    const std::size_t base = static_cast<std::size_t>((column * n + q) * 3);
    const double s = adjoint ? -1.0 : 1.0;
    apply_1q(amps, n, q, u3_matrix(s * p[base], s * p[base + 1], s * p[base + 2]));
  }
}

void apply_entangler(const HeaSpec& spec, bool reverse, std::span<Complex> amps) {
  if (spec.entangler != Entangler::nearest_neighbor_chain) return;
  const int n = spec.n_qubits;
  if (!reverse) {
    for (int q = 0; q + 1 < n; ++q) apply_cnot(amps, n, q, q + 1);
  } else {
    for (int q = n - 2; q >= 0; --q) apply_cnot(amps, n, q, q + 1);
  }
}

void check_circuit_input(const HeaSpec& spec, const ParamVector& params, std::size_t dim) {
  spec.validate();
  if (params.size() != spec.param_count()) {
    throw std::invalid_argument("parameter count " + std::to_string(params.size()) +
                                " does not match ansatz (" +
                                std::to_string(spec.param_count()) + ")");
  }
  if (dim != spec.dim()) {
    throw std::invalid_argument("state dimension " + std::to_string(dim) +
                                " does not match ansatz dimension " + std::to_string(spec.dim()));
  }
}

}  // namespace

std::size_t dimension_for(int n_qubits) {
  check_qubits(n_qubits);
  return std::size_t{1} << n_qubits;
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != dimension_for(n_qubits_)) {
    throw std::invalid_argument("state vector needs 2^N amplitudes");
  }
  if (std::abs(norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("state vector is not normalized");
  }
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
  std::vector<Complex> amps(dimension_for(n_qubits));
  if (index >= amps.size()) throw std::out_of_range("basis index out of range");
  amps[index] = 1.0;
  return StateVector(n_qubits, std::move(amps));
}

StateVector StateVector::normalized(int n_qubits, std::vector<Complex> amplitudes) {
  double sq = 0.0;
  for (const auto& a : amplitudes) sq += std::norm(a);
  if (!(sq > 0.0) || !std::isfinite(sq)) throw std::invalid_argument("cannot normalize zero vector");
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& a : amplitudes) a *= inv;
  return StateVector(n_qubits, std::move(amplitudes));
}

double StateVector::norm() const {
  double sq = 0.0;
  for (const auto& a : amplitudes_) sq += std::norm(a);
  return std::sqrt(sq);
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner: dimension mismatch");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

// -------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(int n_qubits, Eigen::MatrixXcd entries, double tol)
    : n_qubits_(n_qubits), entries_(std::move(entries)) {
  const auto dim = static_cast<Eigen::Index>(dimension_for(n_qubits_));
  if (entries_.rows() != dim || entries_.cols() != dim) {
    throw std::invalid_argument("density matrix must be 2^N x 2^N");
  }
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(entries_.trace() - Complex(1.0)) > tol) {
    throw std::invalid_argument("density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  const auto dim = static_cast<Eigen::Index>(psi.dim());
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = psi[static_cast<std::size_t>(i)];
  return DensityMatrix(psi.n_qubits(), v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  const auto dim = static_cast<Eigen::Index>(dimension_for(n_qubits));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
  return DensityMatrix(n_qubits, std::move(m));
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

double DensityMatrix::expectation(const StateVector& phi) const {
  if (phi.dim() != dim()) throw std::invalid_argument("expectation: dimension mismatch");
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::Map<const Eigen::VectorXcd> v(phi.amplitudes().data(), d);
  return (v.adjoint() * entries_ * v)(0, 0).real();
}

// -------------------------------------------------------------------- HeaSpec

HeaSpec HeaSpec::for_qubits(int n_qubits, int n_layers) {
  HeaSpec spec;
  spec.n_qubits = n_qubits;
  spec.n_layers = n_qubits == 1 ? 0 : n_layers;
  spec.entangler = n_qubits == 1 ? Entangler::none : Entangler::nearest_neighbor_chain;
  spec.validate();
  return spec;
}

std::size_t HeaSpec::param_count() const {
  if (n_qubits == 1) return 3;
  return static_cast<std::size_t>(3 * n_qubits * (n_layers + 1));
}

void HeaSpec::validate() const {
  check_qubits(n_qubits);
  if (n_layers < 0) throw std::invalid_argument("layer count must be >= 0");
  if (n_qubits == 1 && (n_layers != 0 || entangler != Entangler::none)) {
    throw std::invalid_argument("single-qubit ansatz is one U3 gate without entangler");
  }
  if (n_qubits > 1 && entangler != Entangler::nearest_neighbor_chain) {
    throw std::invalid_argument("multi-qubit ansatz needs the nearest-neighbor chain");
  }
}

ParamVector random_params(const HeaSpec& spec, Rng& rng) {
  ParamVector p(spec.param_count());
  for (auto& a : p.angles) a = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return p;
}

std::array<Complex, 4> u3_matrix(double tx, double ty, double tz) {
  // exp(i n.sigma phi) = cos(phi) I + i sin(phi) n.sigma with phi = |theta|/2
  const double r = std::sqrt(tx * tx + ty * ty + tz * tz);
  const double c = std::cos(0.5 * r);
  const double s = r > 1e-12 ? std::sin(0.5 * r) / r : 0.5;
  const Complex i(0.0, 1.0);
  return {Complex(c, s * tz), i * s * Complex(tx, -ty), i * s * Complex(tx, ty),
          Complex(c, -s * tz)};
}

// ----------------------------------------------------------------------- Haar

Eigen::MatrixXcd haar_random_unitary(std::size_t dim, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd g(d, d);
  const double scale = std::sqrt(0.5);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(r, c) = Complex(re, im) * scale;
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= mag > 0.0 ? rjj / mag : Complex(1.0);
  }
  return q;
}

StateVector haar_random_state(int n_qubits, Rng& rng) {
  const Eigen::MatrixXcd u = haar_random_unitary(dimension_for(n_qubits), rng);
  std::vector<Complex> amps(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) amps[static_cast<std::size_t>(i)] = u(i, 0);
  return StateVector::normalized(n_qubits, std::move(amps));
}

// -------------------------------------------------------------------- Circuit

void apply_hea_inplace(const HeaSpec& spec, const ParamVector& params, std::span<Complex> amps) {
  check_circuit_input(spec, params, amps.size());
  apply_u3_column(spec, params, 0, false, amps);
  for (int layer = 1; layer <= spec.n_layers; ++layer) {
    apply_entangler(spec, false, amps);
    apply_u3_column(spec, params, layer, false, amps);
  }
}

void apply_hea_adjoint_inplace(const HeaSpec& spec, const ParamVector& params,
                               std::span<Complex> amps) {
  check_circuit_input(spec, params, amps.size());
  for (int layer = spec.n_layers; layer >= 1; --layer) {
    apply_u3_column(spec, params, layer, true, amps);
    apply_entangler(spec, true, amps);
  }
  apply_u3_column(spec, params, 0, true, amps);
}

StateVector apply_hea(const HeaSpec& spec, const ParamVector& params, const StateVector& input) {
  std::vector<Complex> amps(input.amplitudes().begin(), input.amplitudes().end());
  apply_hea_inplace(spec, params, amps);
  return StateVector::normalized(input.n_qubits(), std::move(amps));
}

StateVector apply_hea_adjoint(const HeaSpec& spec, const ParamVector& params,
                              const StateVector& input) {
  std::vector<Complex> amps(input.amplitudes().begin(), input.amplitudes().end());
  apply_hea_adjoint_inplace(spec, params, amps);
  return StateVector::normalized(input.n_qubits(), std::move(amps));
}

Eigen::MatrixXcd hea_unitary(const HeaSpec& spec, const ParamVector& params) {
  const std::size_t dim = spec.dim();
  Eigen::MatrixXcd u(dim, dim);
  std::vector<Complex> col(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    std::fill(col.begin(), col.end(), Complex(0.0));
    col[c] = 1.0;
    apply_hea_inplace(spec, params, col);
    for (std::size_t r = 0; r < dim; ++r) {
      u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
    }
  }
  return u;
}

StateVector reconstruct_state(const HeaSpec& spec, const ParamVector& params_trained,
                              std::size_t success_basis_index) {
  spec.validate();
  if (success_basis_index >= spec.dim()) {
    throw std::out_of_range("success basis index out of range");
  }
  return apply_hea_adjoint(spec, params_trained,
                           StateVector::basis(spec.n_qubits, success_basis_index));
}

double infidelity(const StateVector& target, const StateVector& estimate) {
  if (target.dim() != estimate.dim()) throw std::invalid_argument("infidelity: dimension mismatch");
  return std::clamp(1.0 - std::norm(inner(target, estimate)), 0.0, 1.0);
}

double infidelity(const DensityMatrix& target, const StateVector& estimate) {
  if (target.dim() != estimate.dim()) throw std::invalid_argument("infidelity: dimension mismatch");
  return std::clamp(1.0 - target.expectation(estimate), 0.0, 1.0);
}

// ---------------------------------------------------------------- Mixed states

DensityMatrix depolarize(const StateVector& psi, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("depolarizing strength must be in [0, 1]");
  const auto d = static_cast<Eigen::Index>(psi.dim());
  Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), d);
  Eigen::MatrixXcd m = (1.0 - mu) * (v * v.adjoint()) +
                       (mu / static_cast<double>(d)) * Eigen::MatrixXcd::Identity(d, d);
  return DensityMatrix(psi.n_qubits(), std::move(m));
}

namespace {

Eigen::MatrixXd shen_castan_raw() {
  constexpr int kDim = 32;
  Eigen::MatrixXd a(kDim, kDim);
  for (int m = 1; m <= kDim; ++m) {
    for (int n = 1; n <= kDim; ++n) {
      a(m - 1, n - 1) = std::exp(-(std::abs(m - 16.5) + std::abs(n - 16.5) + 1.0) / 10.0);
    }
  }
  return a;
}

}  // namespace

double shen_castan_normalization() { return shen_castan_raw().trace(); }

DensityMatrix shen_castan_state() {
  const Eigen::MatrixXd a = shen_castan_raw();
  Eigen::MatrixXcd rho = (a / a.trace()).cast<Complex>();
  return DensityMatrix(5, std::move(rho));
}

Eigen::Matrix2cd reduced_qubit_state(const DensityMatrix& rho, int qubit_index) {
  const int n = rho.n_qubits();
  if (qubit_index < 0 || qubit_index >= n) throw std::out_of_range("qubit index out of range");
  const std::size_t bit = std::size_t{1} << (n - 1 - qubit_index);
  const auto& m = rho.matrix();
  Eigen::Matrix2cd red = Eigen::Matrix2cd::Zero();
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    if (i & bit) continue;
    // i ranges over the environment configurations with this qubit cleared
    const std::size_t idx[2] = {i, i | bit};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        red(a, b) += m(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b]));
      }
    }
  }
  return red;
}

double subsystem_entropy(const DensityMatrix& rho, int qubit_index) {
  const Eigen::Matrix2cd red = reduced_qubit_state(rho, qubit_index);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(red, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 1e-15) s -= lam * std::log2(lam);
  }
  return std::max(s, 0.0);
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  const auto d = u.rows();
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
}

}  // namespace qmeta
