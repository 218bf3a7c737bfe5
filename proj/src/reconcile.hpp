#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rng.hpp"
#include "transcript.hpp"

namespace qkdnet {

struct CascadeOptions {
  std::size_t passes = 4;
  /// Extra passes (halving the block size each time) are allowed until this
  /// many have run; after that a failed verification aborts the session.
  std::size_t max_passes = 16;
  /// Width of the universal-hash tag that confirms both copies agree.
  std::size_t verify_bits = 32;
  /// Block sizing used when the caller expected no errors but verification failed.
  double fallback_qber = 0.01;
};

struct Reconciliation {
  /// Receiver's corrected copy; equals the sender's bits on success.
  std::vector<std::uint8_t> corrected;
  std::uint64_t leakage_bits = 0;
  std::uint64_t parity_bits = 0;
  std::uint64_t verification_bits = 0;
  std::uint64_t errors_corrected = 0;
  std::size_t passes = 0;
};

/// Cascade-style interactive reconciliation between the sender (reference
/// copy) and receiver. Each pass shuffles the string with a permutation drawn
/// from the shared public stream, compares block parities, bisects mismatched
/// blocks, and revisits earlier passes affected by each correction. A random
/// linear hash of verify_bits bits confirms the result.
///
/// With qber_hint <= 0 the hash is checked first and parity exchange happens
/// only if it fails, so identical inputs leak exactly verify_bits.
///
/// Every parity or tag bit the sender discloses is counted in leakage_bits and,
/// when a transcript is given, recorded there under phase "cascade" or "verify".
Reconciliation error_correct(std::span<const std::uint8_t> sender_bits, std::span<const std::uint8_t> receiver_bits,
                             double qber_hint, Rng& public_rng, Transcript* transcript = nullptr,
                             const CascadeOptions& options = {});

/// leakage / (n * H2(qber)); the realized error-correction efficiency.
double reconciliation_efficiency(std::uint64_t leakage_bits, std::size_t n, double qber);

}  // namespace qkdnet
