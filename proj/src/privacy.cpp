#include "privacy.hpp"

#include <bit>
#include <cmath>

#include "error.hpp"

namespace qkdnet {

namespace {

std::vector<std::uint64_t> pack_words(std::span<const std::uint8_t> bits, std::size_t extra_words = 0) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64 + extra_words, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) words[i / 64] |= std::uint64_t{bits[i] & 1u} << (i % 64);
  return words;
}

}  // namespace

std::size_t secure_length(std::size_t n, std::uint64_t leakage_bits, const DecoyEstimate& est,
                          const MeasuredStats& stats, std::size_t safety_bits) {
  if (n == 0 || stats.q_mu <= 0.0 || est.q1_lower <= 0.0) return 0;
  const double single_photon_fraction = est.q1_lower / stats.q_mu;
  const double m = std::floor(static_cast<double>(n) * single_photon_fraction * (1.0 - binary_entropy(est.e1_upper)) -
                              static_cast<double>(leakage_bits) - static_cast<double>(safety_bits));
  return m > 0.0 ? static_cast<std::size_t>(m) : 0;
}

std::vector<std::uint8_t> toeplitz_hash(std::span<const std::uint8_t> bits, std::size_t output_bits,
                                        std::span<const std::uint8_t> seed_bits) {
  const std::size_t n = bits.size();
  const std::size_t m = output_bits;
  if (m == 0) return {};
  require(n > 0 && seed_bits.size() == n + m - 1, ErrorCode::invalid_argument,
          "toeplitz_hash: seed must hold n + m - 1 bits");

  // out_i = XOR_k seed[i + k] * x[n - 1 - k]: a sliding window over the seed
  // against the reversed input.
  std::vector<std::uint8_t> reversed(bits.rbegin(), bits.rend());
  const std::vector<std::uint64_t> x = pack_words(reversed);
  const std::vector<std::uint64_t> s = pack_words(seed_bits, 1);

  std::vector<std::uint8_t> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t q = i / 64;
    const unsigned r = static_cast<unsigned>(i % 64);
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < x.size(); ++w) {
      const std::uint64_t window = r == 0 ? s[q + w] : (s[q + w] >> r) | (s[q + w + 1] << (64 - r));
      acc ^= window & x[w];
    }
    out[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return out;
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < out.size() * 8; ++i) out[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1u) << (i % 8));
  return out;
}

AmplifiedKey privacy_amplify(std::span<const std::uint8_t> corrected_bits, std::uint64_t leakage_bits,
                             const DecoyEstimate& est, const MeasuredStats& stats, Rng& public_rng,
                             std::size_t safety_bits) {
  AmplifiedKey result;
  result.secure_bits = secure_length(corrected_bits.size(), leakage_bits, est, stats, safety_bits);
  if (result.secure_bits == 0) fail(ErrorCode::no_secure_key, "no secure key: privacy amplification leaves 0 bits");

  const std::size_t n = corrected_bits.size();
  std::vector<std::uint8_t> seed(n + result.secure_bits - 1);
  for (std::size_t i = 0; i < seed.size(); i += 64) {
    const std::uint64_t word = public_rng.next();
    for (std::size_t b = 0; b < 64 && i + b < seed.size(); ++b) seed[i + b] = static_cast<std::uint8_t>((word >> b) & 1u);
  }
  result.key = pack_bits(toeplitz_hash(corrected_bits, result.secure_bits, seed));
  return result;
}

}  // namespace qkdnet
