#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "decoy_analysis.hpp"
#include "rng.hpp"

namespace qkdnet {

inline constexpr std::size_t kDefaultSafetyBits = 64;

/// floor(n * (Q1_L / Q_mu) * (1 - H2(e1_U)) - leakage - safety), clamped at 0.
std::size_t secure_length(std::size_t n, std::uint64_t leakage_bits, const DecoyEstimate& est,
                          const MeasuredStats& stats, std::size_t safety_bits = kDefaultSafetyBits);

/// Toeplitz-matrix hash of `bits` down to `output_bits`. The matrix is fixed by
/// n + m - 1 seed bits: entry (i, j) is seed[i - j + n - 1].
std::vector<std::uint8_t> toeplitz_hash(std::span<const std::uint8_t> bits, std::size_t output_bits,
                                        std::span<const std::uint8_t> seed_bits);

struct AmplifiedKey {
  std::size_t secure_bits = 0;
  /// floor(secure_bits / 8) bytes; trailing bits that do not fill a byte are dropped.
  std::vector<std::uint8_t> key;
};

/// Compresses the reconciled key with a Toeplitz hash whose seed is drawn from
/// the shared public stream, so both parties arrive at the same bytes.
/// Throws Error(no_secure_key) when the secure length is zero.
AmplifiedKey privacy_amplify(std::span<const std::uint8_t> corrected_bits, std::uint64_t leakage_bits,
                             const DecoyEstimate& est, const MeasuredStats& stats, Rng& public_rng,
                             std::size_t safety_bits = kDefaultSafetyBits);

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);

}  // namespace qkdnet
