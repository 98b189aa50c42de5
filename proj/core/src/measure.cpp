#include "qmeta/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmeta {

namespace {

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

double pure_probability(std::span<const Complex> psi, const HeaSpec& spec,
                        const ParamVector& params, std::size_t basis, std::vector<Complex>& buf) {
  buf.assign(psi.begin(), psi.end());
  apply_hea_inplace(spec, params, buf);
  return clamp_probability(std::norm(buf[basis]));
}

double mixed_probability(const DensityMatrix& rho, const HeaSpec& spec, const ParamVector& params,
                         std::size_t basis, std::vector<Complex>& buf) {
  // <s|U rho U^dag|s> = <phi|rho|phi> with |phi> = U^dag |s>
  buf.assign(rho.dim(), Complex(0.0));
  buf[basis] = 1.0;
  apply_hea_adjoint_inplace(spec, params, buf);
  Eigen::Map<const Eigen::VectorXcd> phi(buf.data(), static_cast<Eigen::Index>(buf.size()));
  return clamp_probability((phi.adjoint() * rho.matrix() * phi)(0, 0).real());
}

void check_basis(const HeaSpec& spec, std::size_t dim, std::size_t basis) {
  if (dim != spec.dim()) throw std::invalid_argument("state dimension does not match ansatz");
  if (basis >= dim) throw std::out_of_range("success basis index out of range");
}

}  // namespace

double success_probability(const StateVector& psi, const HeaSpec& spec, const ParamVector& params,
                           std::size_t success_basis) {
  check_basis(spec, psi.dim(), success_basis);
  std::vector<Complex> buf;
  return pure_probability(psi.amplitudes(), spec, params, success_basis, buf);
}

double success_probability(const DensityMatrix& rho, const HeaSpec& spec,
                           const ParamVector& params, std::size_t success_basis) {
  check_basis(spec, rho.dim(), success_basis);
  std::vector<Complex> buf;
  return mixed_probability(rho, spec, params, success_basis, buf);
}

double success_probability(const QuantumState& state, const HeaSpec& spec,
                           const ParamVector& params, std::size_t success_basis) {
  return std::visit(
      [&](const auto& s) { return success_probability(s, spec, params, success_basis); }, state);
}

SuccessCountSample sample_success_count(double p_s, std::uint64_t cap, Rng& rng,
                                        SamplingMode mode) {
  if (cap < 1) throw std::invalid_argument("success-count cap must be >= 1");
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw std::invalid_argument("success probability outside [0, 1]");
  if (p_s >= 1.0) return {cap, true};
  if (p_s <= 0.0) return {0, false};

  if (mode == SamplingMode::shot_by_shot) {
    std::uint64_t c = 0;
    while (c < cap) {
      if (rng.uniform() >= p_s) return {c, false};
      ++c;
    }
    return {cap, true};
  }

  // P(C >= c) = p^c, so C = floor(ln u / ln p) for u uniform on (0, 1]
  const double c = std::floor(std::log(rng.uniform_pos()) / std::log(p_s));
  if (c >= static_cast<double>(cap)) return {cap, true};
  return {static_cast<std::uint64_t>(c), false};
}

CircuitEnvironment::CircuitEnvironment(QuantumState target, HeaSpec spec,
                                       std::size_t success_basis, std::uint64_t cap,
                                       SamplingMode mode)
    : Environment(cap, mode),
      target_(std::move(target)),
      spec_(spec),
      success_basis_(success_basis) {
  spec_.validate();
  const std::size_t dim = std::visit([](const auto& s) { return s.dim(); }, target_);
  check_basis(spec_, dim, success_basis_);
}

double CircuitEnvironment::success_probability(const ParamVector& params) {
  if (const auto* psi = std::get_if<StateVector>(&target_)) {
    return pure_probability(psi->amplitudes(), spec_, params, success_basis_, scratch_);
  }
  return mixed_probability(std::get<DensityMatrix>(target_), spec_, params, success_basis_,
                           scratch_);
}

}  // namespace qmeta
