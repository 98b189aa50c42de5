#pragma once

// Single-shot success/fail measurement: repeat the binary measurement
// {|s><s|, I - |s><s|} until the first fail and report the run length.

#include <cstdint>
#include <vector>

#include "qmeta/qsim.hpp"
#include "qmeta/rng.hpp"
#include "qmeta/state_io.hpp"

namespace qmeta {

struct SuccessCountSample {
  std::uint64_t count = 0;
  bool capped = false;  // true iff the count was truncated at the cap
};

/// Running success/fail shot totals for one learning run. Fail shots are kept
/// separately and are not part of the success total.
class ShotLedger {
 public:
  void record(const SuccessCountSample& s) {
    total_success_ += s.count;
    if (!s.capped) ++total_fail_;
  }
  std::uint64_t total_success() const { return total_success_; }
  std::uint64_t total_fail() const { return total_fail_; }

 private:
  std::uint64_t total_success_ = 0;
  std::uint64_t total_fail_ = 0;
};

enum class SamplingMode {
  closed_form,  // geometric inverse transform, O(1)
  shot_by_shot  // explicit Bernoulli loop, for validation
};

/// |<s|U(theta)|psi>|^2, clamped to [0, 1].
double success_probability(const StateVector& psi, const HeaSpec& spec, const ParamVector& params,
                           std::size_t success_basis);
/// <s|U rho U^dagger|s>, clamped to [0, 1].
double success_probability(const DensityMatrix& rho, const HeaSpec& spec,
                           const ParamVector& params, std::size_t success_basis);
double success_probability(const QuantumState& state, const HeaSpec& spec,
                           const ParamVector& params, std::size_t success_basis);

/// Draws C ~ p^C (1 - p), truncated at `cap`. p = 1 returns the cap.
SuccessCountSample sample_success_count(double p_s, std::uint64_t cap, Rng& rng,
                                        SamplingMode mode = SamplingMode::closed_form);

/// Something that turns circuit parameters into success counts. Owns the
/// ledger of every shot it has produced.
class Environment {
 public:
  Environment(std::uint64_t cap, SamplingMode mode) : cap_(cap), mode_(mode) {}
  virtual ~Environment() = default;

  virtual double success_probability(const ParamVector& params) = 0;
  virtual std::size_t param_count() const = 0;

  SuccessCountSample measure(const ParamVector& params, Rng& rng) {
    const auto s = sample_success_count(success_probability(params), cap_, rng, mode_);
    ledger_.record(s);
    return s;
  }

  std::uint64_t cap() const { return cap_; }
  const ShotLedger& ledger() const { return ledger_; }
  void reset_ledger() { ledger_ = ShotLedger{}; }

 private:
  std::uint64_t cap_;
  SamplingMode mode_;
  ShotLedger ledger_;
};

/// The quantum environment: an unknown state, the ansatz and the success basis.
class CircuitEnvironment final : public Environment {
 public:
  CircuitEnvironment(QuantumState target, HeaSpec spec, std::size_t success_basis,
                     std::uint64_t cap, SamplingMode mode = SamplingMode::closed_form);

  double success_probability(const ParamVector& params) override;
  std::size_t param_count() const override { return spec_.param_count(); }

  const QuantumState& target() const { return target_; }
  const HeaSpec& spec() const { return spec_; }
  std::size_t success_basis() const { return success_basis_; }

 private:
  QuantumState target_;
  HeaSpec spec_;
  std::size_t success_basis_;
  std::vector<Complex> scratch_;
};

}  // namespace qmeta
