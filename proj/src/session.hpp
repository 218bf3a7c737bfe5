#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bb84.hpp"
#include "decoy_analysis.hpp"
#include "phys_model.hpp"
#include "privacy.hpp"
#include "reconcile.hpp"
#include "transcript.hpp"

namespace qkdnet {

struct SessionKeys {
  /// Sifted signal bits before the test sample was disclosed.
  std::vector<std::uint8_t> raw_sifted;
  std::vector<std::uint8_t> corrected;
  std::uint64_t leakage_bits = 0;
  std::vector<std::uint8_t> final_key;
};

struct SessionConfig {
  IntensitySettings intensity;
  RateSettings rate;
  double test_fraction = 0.1;
  std::size_t safety_bits = kDefaultSafetyBits;
  std::uint64_t pulses = 10'000'000;
  /// Pulse counts used for the finite-size bounds. When set, the simulated
  /// block is treated as a sample of a longer run with these counts; when
  /// empty, the simulated counts are used as-is.
  std::optional<PulseBudget> analysis_budget;
  CascadeOptions cascade;
  std::uint64_t chunk_pulses = std::uint64_t{1} << 20;
};

struct SessionResult {
  std::string link;
  std::uint64_t pulses = 0;
  std::uint64_t clicks = 0;
  std::uint64_t sifted_signal_bits = 0;
  EstimationResult estimation;
  /// Simulated counts; E_mu refined with the errors found by reconciliation.
  MeasuredStats measured;
  /// `measured` with the analysis-budget pulse counts substituted.
  MeasuredStats analysed;
  DecoyEstimate estimate;
  SessionKeys keys;
  std::vector<std::uint8_t> receiver_final_key;
  std::uint64_t errors_corrected = 0;
  double realized_f = 0.0;
  bool keys_match = false;
  bool secure = false;
  std::string note;
  Transcript transcript;
};

/// One complete QKD session on a link: pulse preparation, channel, sifting,
/// parameter estimation, reconciliation, decoy analysis and privacy
/// amplification. Fully determined by (link, config, seed).
///
/// A session that ends with no provable key returns secure = false with the
/// reason in `note`; only protocol failures (desynchronization, failed
/// reconciliation) throw.
SessionResult run_session(const LinkParams& link, const SessionConfig& config, std::uint64_t seed);

}  // namespace qkdnet
