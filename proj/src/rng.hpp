#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qkdnet {

/// Seeded random stream. Every stochastic operation takes one of these
/// explicitly; there is no global or wall-clock entropy anywhere in the library.
///
/// Only the engine comes from <random>; distributions are built from raw 64-bit draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }
  /// Uniform integer in [0, n); n must be nonzero.
  std::uint64_t below(std::uint64_t n);

  void fill(std::span<std::uint8_t> out);
  std::vector<std::uint8_t> bytes(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// Derives an independent child stream; used to hand one seed to a sub-protocol.
  Rng fork(std::uint64_t stream) { return Rng(engine_(), stream); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qkdnet
