#include "session.hpp"

#include <algorithm>

#include "error.hpp"

namespace qkdnet {

namespace {

enum Stream : std::uint64_t { kSender = 1, kChannel = 2, kPublic = 3 };

}  // namespace

SessionResult run_session(const LinkParams& link, const SessionConfig& config, std::uint64_t seed) {
  link.validate();
  config.intensity.validate();
  config.rate.validate();
  require(config.pulses > 0 && config.chunk_pulses > 0, ErrorCode::invalid_argument, "session needs pulses");

  Rng sender_rng(seed, kSender);
  Rng channel_rng(seed, kChannel);
  Rng public_rng(seed, kPublic);

  SessionResult r;
  r.link = link.name;
  r.pulses = config.pulses;

  SiftedBlocks blocks = empty_blocks();
  for (std::uint64_t start = 0; start < config.pulses; start += config.chunk_pulses) {
    const std::uint64_t n = std::min(config.chunk_pulses, config.pulses - start);
    const auto train = prepare_pulse_train(n, config.intensity, sender_rng, start);
    const auto detections = run_quantum_phase(train, link, config.intensity, channel_rng);
    r.clicks += detections.size();
    // Receiver announces click positions and bases; sender answers with basis match and class.
    r.transcript.record("sifting", Direction::receiver_to_sender, detections.size() * 33, false);
    r.transcript.record("sifting", Direction::sender_to_receiver, detections.size() * 3, false);
    merge_blocks(blocks, sift(train, detections));
  }

  SiftedBlock& signal = blocks[PulseClass::signal];
  r.sifted_signal_bits = signal.sender_bits.size();
  r.keys.raw_sifted = signal.sender_bits;

  r.estimation = estimate_stats(blocks, config.test_fraction, config.intensity, public_rng);
  const std::uint64_t sample = r.estimation.signal_sample_bits + r.estimation.decoy_sample_bits;
  r.transcript.record("estimation", Direction::receiver_to_sender, sample * 33, false);
  r.transcript.record("estimation", Direction::sender_to_receiver, sample, false);

  const Reconciliation rec = error_correct(signal.sender_bits, signal.receiver_bits, r.estimation.stats.e_mu,
                                           public_rng, &r.transcript, config.cascade);
  r.keys.corrected = signal.sender_bits;
  r.keys.leakage_bits = rec.leakage_bits;
  r.errors_corrected = rec.errors_corrected;

  // Reconciliation located every error in the key bits; together with the
  // disclosed sample that gives E_mu over the whole sifted signal block.
  r.measured = r.estimation.stats;
  const std::uint64_t checked = r.estimation.signal_sample_bits + signal.sender_bits.size();
  r.measured.e_mu = std::min(
      0.5, static_cast<double>(r.estimation.signal_sample_errors + rec.errors_corrected) / static_cast<double>(checked));
  r.realized_f = reconciliation_efficiency(rec.leakage_bits, signal.sender_bits.size(), r.measured.e_mu);

  r.analysed = r.measured;
  if (config.analysis_budget) {
    r.analysed.n_mu = config.analysis_budget->signal;
    r.analysed.n_nu = config.analysis_budget->decoy;
    r.analysed.n_0 = config.analysis_budget->vacuum;
  }
  r.estimate = key_rate(r.analysed, config.rate);

  // Both parties hash their own reconciled copy with the same public seed.
  const std::uint64_t pa_seed = public_rng.next();
  try {
    Rng sender_pa(pa_seed);
    Rng receiver_pa(pa_seed);
    r.keys.final_key =
        privacy_amplify(r.keys.corrected, rec.leakage_bits, r.estimate, r.analysed, sender_pa, config.safety_bits).key;
    r.receiver_final_key =
        privacy_amplify(rec.corrected, rec.leakage_bits, r.estimate, r.analysed, receiver_pa, config.safety_bits).key;
    r.keys_match = r.keys.final_key == r.receiver_final_key;
    r.secure = !r.keys.final_key.empty() && r.keys_match;
    if (r.keys.final_key.empty()) r.note = "secure length below one byte";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_secure_key) throw;
    r.keys_match = true;
    r.note = e.what();
  }
  return r;
}

}  // namespace qkdnet
