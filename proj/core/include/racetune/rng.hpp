#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace racetune {

/// SplitMix64 finalizer. Used to derive independent seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Mixes an arbitrary list of integers into one 64-bit seed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// Maps a 64-bit hash onto [0, 1) with 53 bits of resolution.
inline double hash_to_unit(std::uint64_t h) noexcept { return static_cast<double>(h >> 11) * 0x1.0p-53; }

/// Seeded generator with platform-independent derived distributions.
///
/// The standard library distributions are implementation-defined, so every
/// draw used by the tuner goes through the helpers here to keep sample
/// streams bit-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return hash_to_unit(engine_()); }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t below(std::size_t n);

  /// Standard normal variate (Marsaglia polar method).
  double normal();

  std::string save() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace racetune
