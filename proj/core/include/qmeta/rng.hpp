#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace qmeta {

/// Name of the bit generator, recorded in run manifests.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64-subseed";

/// Seeded 64-bit generator with distribution code that does not depend on the
/// standard library implementation. `std::mt19937_64` is bit-exact across
/// platforms; the uniform and normal transforms below are written out so that
/// every draw is reproducible from the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Serialized engine state plus any cached normal deviate.
  std::string state() const;
  void set_state(const std::string& s);

  bool operator==(const Rng& other) const;

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a master seed, an instance index and a stream tag into an
/// independent seed. Deterministic and bijective in `instance_index` for a
/// fixed (master_seed, stream_tag).
std::uint64_t derive_subseed(std::uint64_t master_seed, std::uint64_t instance_index,
                             std::string_view stream_tag);

}  // namespace qmeta
