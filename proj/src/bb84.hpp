#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "phys_model.hpp"
#include "pulse.hpp"
#include "rng.hpp"

namespace qkdnet {

struct SiftedBlock {
  PulseClass pulse_class = PulseClass::signal;
  std::vector<std::uint8_t> sender_bits;
  std::vector<std::uint8_t> receiver_bits;
  std::uint64_t sent_count = 0;
  /// All clicks in this class, basis-matched or not.
  std::uint64_t clicks = 0;
  std::vector<std::uint64_t> sifted_indices;
};

/// Always holds one entry per pulse class.
using SiftedBlocks = std::map<PulseClass, SiftedBlock>;

SiftedBlocks empty_blocks();

/// Appends `more` to `into`, class by class.
void merge_blocks(SiftedBlocks& into, SiftedBlocks&& more);

/// n pulses, each independently assigned a class with probability proportional
/// to the occupancy weights, a uniform bit and a uniform basis. Indices start
/// at first_index and increase by one.
std::vector<PulseRecord> prepare_pulse_train(std::uint64_t n, const IntensitySettings& settings, Rng& rng,
                                             std::uint64_t first_index = 0);

/// Sends every pulse through the channel and returns the receiver's record of
/// the gates that clicked, in index order. Gates without a click are not
/// announced, matching what a receiver reports over the classical channel.
std::vector<DetectionRecord> run_quantum_phase(std::span<const PulseRecord> train, const LinkParams& link,
                                               const IntensitySettings& settings, Rng& rng);

/// Basis reconciliation. Detections may be sparse (clicked gates only) or
/// dense; either way every detection index must appear in the train, else
/// Error(desynchronized_session).
SiftedBlocks sift(std::span<const PulseRecord> train, std::span<const DetectionRecord> detections);

struct EstimationResult {
  MeasuredStats stats;
  std::uint64_t signal_sample_bits = 0;
  std::uint64_t signal_sample_errors = 0;
  std::uint64_t decoy_sample_bits = 0;
  std::uint64_t decoy_sample_errors = 0;
};

/// Parameter estimation. Gains come from click counts over sent counts. E_mu
/// is measured on a random test_fraction of the sifted signal bits, which are
/// disclosed and removed from `blocks`. Decoy bits never become key, so all of
/// them are disclosed for E_nu.
EstimationResult estimate_stats(SiftedBlocks& blocks, double test_fraction, const IntensitySettings& settings,
                                Rng& rng);

std::uint64_t count_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

}  // namespace qkdnet
