#include "bb84.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detection_model.hpp"
#include "error.hpp"

namespace qkdnet {

SiftedBlocks empty_blocks() {
  SiftedBlocks blocks;
  for (PulseClass c : kPulseClasses) blocks[c].pulse_class = c;
  return blocks;
}

void merge_blocks(SiftedBlocks& into, SiftedBlocks&& more) {
  for (auto& [cls, block] : more) {
    SiftedBlock& dst = into[cls];
    dst.pulse_class = cls;
    dst.sent_count += block.sent_count;
    dst.clicks += block.clicks;
    dst.sender_bits.insert(dst.sender_bits.end(), block.sender_bits.begin(), block.sender_bits.end());
    dst.receiver_bits.insert(dst.receiver_bits.end(), block.receiver_bits.begin(), block.receiver_bits.end());
    dst.sifted_indices.insert(dst.sifted_indices.end(), block.sifted_indices.begin(), block.sifted_indices.end());
  }
}

std::vector<PulseRecord> prepare_pulse_train(std::uint64_t n, const IntensitySettings& settings, Rng& rng,
                                             std::uint64_t first_index) {
  settings.validate();
  const std::uint64_t w_signal = settings.occupancy[0];
  const std::uint64_t w_decoy = settings.occupancy[1];
  const std::uint64_t total = w_signal + w_decoy + settings.occupancy[2];

  std::vector<PulseRecord> train(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    PulseRecord& p = train[i];
    p.index = first_index + i;
    const std::uint64_t slot = rng.below(total);
    p.pulse_class = slot < w_signal ? PulseClass::signal
                    : slot < w_signal + w_decoy ? PulseClass::decoy
                                                : PulseClass::vacuum;
    const std::uint64_t r = rng.next();
    p.bit = static_cast<std::uint8_t>(r >> 63);
    p.basis = static_cast<Basis>((r >> 62) & 1u);
  }
  return train;
}

std::vector<DetectionRecord> run_quantum_phase(std::span<const PulseRecord> train, const LinkParams& link,
                                               const IntensitySettings& settings, Rng& rng) {
  link.validate();
  const DetectionModel model(link, settings);
  std::vector<DetectionRecord> out;
  for (const PulseRecord& p : train) {
    DetectionRecord d = model.sample(p, rng);
    if (d.clicked) out.push_back(d);
  }
  return out;
}

SiftedBlocks sift(std::span<const PulseRecord> train, std::span<const DetectionRecord> detections) {
  SiftedBlocks blocks = empty_blocks();
  for (const PulseRecord& p : train) ++blocks[p.pulse_class].sent_count;

  std::size_t t = 0;
  std::uint64_t last_index = 0;
  bool first = true;
  for (const DetectionRecord& d : detections) {
    if (!first && d.index <= last_index) fail(ErrorCode::desynchronized_session, "desynchronized session: detection indices not increasing");
    first = false;
    last_index = d.index;
    while (t < train.size() && train[t].index < d.index) ++t;
    if (t == train.size() || train[t].index != d.index) {
      fail(ErrorCode::desynchronized_session, "desynchronized session: detection for unknown pulse index");
    }
    if (!d.clicked) continue;
    const PulseRecord& p = train[t];
    SiftedBlock& block = blocks[p.pulse_class];
    ++block.clicks;
    if (d.basis != p.basis || p.pulse_class == PulseClass::vacuum) continue;
    block.sender_bits.push_back(p.bit);
    block.receiver_bits.push_back(d.bit);
    block.sifted_indices.push_back(p.index);
  }
  return blocks;
}

std::uint64_t count_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  require(a.size() == b.size(), ErrorCode::invalid_argument, "bit sequences differ in length");
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]);
  return n;
}

namespace {

void drop_positions(SiftedBlock& block, std::vector<std::size_t> positions) {
  std::sort(positions.begin(), positions.end());
  std::size_t out = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < block.sender_bits.size(); ++i) {
    if (next < positions.size() && positions[next] == i) {
      ++next;
      continue;
    }
    block.sender_bits[out] = block.sender_bits[i];
    block.receiver_bits[out] = block.receiver_bits[i];
    block.sifted_indices[out] = block.sifted_indices[i];
    ++out;
  }
  block.sender_bits.resize(out);
  block.receiver_bits.resize(out);
  block.sifted_indices.resize(out);
}

}  // namespace

EstimationResult estimate_stats(SiftedBlocks& blocks, double test_fraction, const IntensitySettings& settings,
                                Rng& rng) {
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorCode::domain, "test_fraction must lie in (0, 1)");
  SiftedBlock& signal = blocks[PulseClass::signal];
  SiftedBlock& decoy = blocks[PulseClass::decoy];
  SiftedBlock& vacuum = blocks[PulseClass::vacuum];
  require(signal.sent_count > 0 && !signal.sender_bits.empty(), ErrorCode::insufficient_decoy_data,
          "insufficient statistics: no sifted signal bits");
  for (const SiftedBlock* b : {&signal, &decoy}) {
    require(b->sender_bits.size() == b->receiver_bits.size() && b->sender_bits.size() == b->sifted_indices.size(),
            ErrorCode::invalid_argument, "sifted block columns differ in length");
  }
  require(decoy.sent_count > 0 && vacuum.sent_count > 0, ErrorCode::insufficient_decoy_data,
          "insufficient decoy statistics: decoy or vacuum class is empty");

  EstimationResult r;
  MeasuredStats& s = r.stats;
  s.mu = settings.mu;
  s.nu = settings.nu;
  s.n_mu = static_cast<double>(signal.sent_count);
  s.n_nu = static_cast<double>(decoy.sent_count);
  s.n_0 = static_cast<double>(vacuum.sent_count);
  s.q_mu = static_cast<double>(signal.clicks) / s.n_mu;
  s.q_nu = static_cast<double>(decoy.clicks) / s.n_nu;
  s.y0 = static_cast<double>(vacuum.clicks) / s.n_0;

  const std::size_t n = signal.sender_bits.size();
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(test_fraction * n)), 1, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  order.resize(k);
  for (std::size_t pos : order) r.signal_sample_errors += signal.sender_bits[pos] != signal.receiver_bits[pos];
  r.signal_sample_bits = k;
  s.e_mu = std::min(0.5, static_cast<double>(r.signal_sample_errors) / static_cast<double>(k));
  drop_positions(signal, std::move(order));

  r.decoy_sample_bits = decoy.sender_bits.size();
  r.decoy_sample_errors = count_mismatches(decoy.sender_bits, decoy.receiver_bits);
  s.e_nu = r.decoy_sample_bits == 0
               ? 0.0
               : std::min(0.5, static_cast<double>(r.decoy_sample_errors) / static_cast<double>(r.decoy_sample_bits));
  return r;
}

}  // namespace qkdnet
