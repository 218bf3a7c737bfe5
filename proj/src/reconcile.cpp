#include "reconcile.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "decoy_analysis.hpp"
#include "error.hpp"

namespace qkdnet {

namespace {

using Permutation = std::vector<std::uint32_t>;

// Public random linear hash: tag bit r is the parity of the key masked by row r.
class VerificationHash {
 public:
  VerificationHash(std::size_t n, std::size_t width, Rng& rng) : words_((n + 63) / 64), rows_(width) {
    masks_.resize(words_ * rows_);
    for (auto& m : masks_) m = rng.next();
  }

  std::vector<std::uint8_t> tag(std::span<const std::uint8_t> bits) const {
    std::vector<std::uint64_t> packed(words_, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) packed[i / 64] |= std::uint64_t{bits[i] & 1u} << (i % 64);
    std::vector<std::uint8_t> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      std::uint64_t acc = 0;
      for (std::size_t w = 0; w < words_; ++w) acc ^= packed[w] & masks_[r * words_ + w];
      out[r] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return out;
  }

 private:
  std::size_t words_;
  std::size_t rows_;
  std::vector<std::uint64_t> masks_;
};

// The sender's side of the exchange. The receiver learns about the sender's
// bits only through these calls, each of which is logged.
class SenderEndpoint {
 public:
  SenderEndpoint(std::span<const std::uint8_t> bits, Transcript* transcript) : bits_(bits), transcript_(transcript) {}

  std::vector<std::uint8_t> block_parities(const Permutation& perm, std::size_t block_size) {
    std::vector<std::uint8_t> out((bits_.size() + block_size - 1) / block_size, 0);
    for (std::size_t pos = 0; pos < perm.size(); ++pos) out[pos / block_size] ^= bits_[perm[pos]];
    disclose_parities(out.size());
    return out;
  }

  std::uint8_t range_parity(const Permutation& perm, std::size_t lo, std::size_t hi) {
    note("cascade", 64);  // request: pass id and range
    std::uint8_t p = 0;
    for (std::size_t pos = lo; pos < hi; ++pos) p ^= bits_[perm[pos]];
    disclose_parities(1);
    return p;
  }

  std::vector<std::uint8_t> verification_tag(const VerificationHash& hash) {
    auto tag = hash.tag(bits_);
    disclose_tag(tag.size());
    return tag;
  }

  void receiver_verdict() { note("verify", 1, Direction::receiver_to_sender); }

  std::uint64_t parity_bits() const { return parity_bits_; }
  std::uint64_t verification_bits() const { return verification_bits_; }

 private:
  void disclose_parities(std::uint64_t bits) {
    parity_bits_ += bits;
    if (transcript_) transcript_->record("cascade", Direction::sender_to_receiver, bits, true);
  }
  void disclose_tag(std::uint64_t bits) {
    verification_bits_ += bits;
    if (transcript_) transcript_->record("verify", Direction::sender_to_receiver, bits, true);
  }
  void note(const char* phase, std::uint64_t bits, Direction dir = Direction::receiver_to_sender) {
    if (transcript_) transcript_->record(phase, dir, bits, false);
  }

  std::span<const std::uint8_t> bits_;
  Transcript* transcript_;
  std::uint64_t parity_bits_ = 0;
  std::uint64_t verification_bits_ = 0;
};

struct Pass {
  Permutation perm;
  Permutation inverse;
  std::size_t block_size = 0;
  std::vector<std::uint8_t> sender_top;    // sender parity of each top-level block
  std::vector<std::uint8_t> receiver_top;  // receiver's current parity of the same blocks
  std::unordered_map<std::uint64_t, std::uint8_t> known;  // sender parities of sub-ranges
};

class CascadeReceiver {
 public:
  CascadeReceiver(std::vector<std::uint8_t> bits, SenderEndpoint& sender, Rng& rng)
      : bits_(std::move(bits)), sender_(sender), rng_(rng) {}

  void run_pass(std::size_t block_size) {
    const std::size_t n = bits_.size();
    Pass pass;
    pass.block_size = std::clamp<std::size_t>(block_size, 1, n);
    pass.perm.resize(n);
    std::iota(pass.perm.begin(), pass.perm.end(), 0u);
    if (!passes_.empty()) rng_.shuffle(pass.perm);
    pass.inverse.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) pass.inverse[pass.perm[pos]] = static_cast<std::uint32_t>(pos);

    pass.sender_top = sender_.block_parities(pass.perm, pass.block_size);
    pass.receiver_top.assign(pass.sender_top.size(), 0);
    for (std::size_t pos = 0; pos < n; ++pos) pass.receiver_top[pos / pass.block_size] ^= bits_[pass.perm[pos]];

    const std::size_t p = passes_.size();
    passes_.push_back(std::move(pass));
    for (std::size_t b = 0; b < passes_[p].sender_top.size(); ++b) {
      if (passes_[p].sender_top[b] != passes_[p].receiver_top[b]) odd_.insert({p, b});
    }
    settle();
  }

  std::size_t passes() const { return passes_.size(); }
  std::uint64_t corrections() const { return corrections_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

 private:
  static std::uint64_t range_key(std::size_t lo, std::size_t hi) {
    return (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint64_t>(hi);
  }

  // Fixes odd blocks, smallest (earliest pass) first, until every block of
  // every pass so far has matching parity.
  void settle() {
    while (!odd_.empty()) {
      auto [p, b] = *odd_.begin();
      const Pass& pass = passes_[p];
      const std::size_t lo = b * pass.block_size;
      const std::size_t hi = std::min(lo + pass.block_size, bits_.size());
      flip(bisect(p, lo, hi, pass.sender_top[b]));
    }
  }

  std::size_t bisect(std::size_t p, std::size_t lo, std::size_t hi, std::uint8_t sender_parity) {
    Pass& pass = passes_[p];
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      std::uint8_t left;
      if (auto it = pass.known.find(range_key(lo, mid)); it != pass.known.end()) {
        left = it->second;
      } else {
        left = sender_.range_parity(pass.perm, lo, mid);
        pass.known.emplace(range_key(lo, mid), left);
      }
      const std::uint8_t right = sender_parity ^ left;
      pass.known.emplace(range_key(mid, hi), right);
      if (left != receiver_parity(pass, lo, mid)) {
        hi = mid;
        sender_parity = left;
      } else {
        lo = mid;
        sender_parity = right;
      }
    }
    return pass.perm[lo];
  }

  std::uint8_t receiver_parity(const Pass& pass, std::size_t lo, std::size_t hi) const {
    std::uint8_t v = 0;
    for (std::size_t pos = lo; pos < hi; ++pos) v ^= bits_[pass.perm[pos]];
    return v;
  }

  void flip(std::size_t bit) {
    bits_[bit] ^= 1;
    ++corrections_;
    for (std::size_t p = 0; p < passes_.size(); ++p) {
      Pass& pass = passes_[p];
      const std::size_t b = pass.inverse[bit] / pass.block_size;
      pass.receiver_top[b] ^= 1;
      if (pass.receiver_top[b] != pass.sender_top[b]) {
        odd_.insert({p, b});
      } else {
        odd_.erase({p, b});
      }
    }
  }

  std::vector<std::uint8_t> bits_;
  SenderEndpoint& sender_;
  Rng& rng_;
  std::vector<Pass> passes_;
  std::set<std::pair<std::size_t, std::size_t>> odd_;
  std::uint64_t corrections_ = 0;
};

bool verify(std::span<const std::uint8_t> receiver, SenderEndpoint& sender, std::size_t width, Rng& rng) {
  const VerificationHash hash(receiver.size(), width, rng);
  const bool equal = sender.verification_tag(hash) == hash.tag(receiver);
  sender.receiver_verdict();
  return equal;
}

}  // namespace

Reconciliation error_correct(std::span<const std::uint8_t> sender_bits, std::span<const std::uint8_t> receiver_bits,
                             double qber_hint, Rng& public_rng, Transcript* transcript, const CascadeOptions& options) {
  require(sender_bits.size() == receiver_bits.size(), ErrorCode::invalid_argument,
          "error_correct: sender and receiver strings differ in length");
  require(options.passes >= 1 && options.max_passes >= options.passes && options.verify_bits >= 1,
          ErrorCode::invalid_argument, "error_correct: invalid cascade options");
  require(sender_bits.size() < (std::size_t{1} << 32), ErrorCode::invalid_argument,
          "error_correct: string too long");

  SenderEndpoint sender(sender_bits, transcript);
  Reconciliation out;
  const std::size_t n = sender_bits.size();
  auto finish = [&](std::vector<std::uint8_t> bits, std::uint64_t corrected, std::size_t passes) {
    out.corrected = std::move(bits);
    out.errors_corrected = corrected;
    out.passes = passes;
    out.parity_bits = sender.parity_bits();
    out.verification_bits = sender.verification_bits();
    out.leakage_bits = out.parity_bits + out.verification_bits;
    return out;
  };

  if (n == 0) return finish({}, 0, 0);

  if (!(qber_hint > 0.0)) {
    if (verify(receiver_bits, sender, options.verify_bits, public_rng)) {
      return finish({receiver_bits.begin(), receiver_bits.end()}, 0, 0);
    }
    qber_hint = options.fallback_qber;
  }

  const double first = std::ceil(0.73 / std::min(qber_hint, 0.5));
  const auto first_block = static_cast<std::size_t>(std::clamp(first, 1.0, static_cast<double>(n)));
  CascadeReceiver receiver({receiver_bits.begin(), receiver_bits.end()}, sender, public_rng);
  std::size_t block = first_block;
  for (std::size_t i = 0; i < options.passes; ++i, block = std::min(n, block * 2)) receiver.run_pass(block);

  // Retry passes use shrinking blocks.
  block = std::max<std::size_t>(1, std::min(first_block, n / 2));
  while (true) {
    if (verify(receiver.bits(), sender, options.verify_bits, public_rng)) {
      return finish(receiver.bits(), receiver.corrections(), receiver.passes());
    }
    if (receiver.passes() >= options.max_passes) {
      fail(ErrorCode::reconciliation_failed, "reconciliation failed: verification still mismatched after " +
                                                 std::to_string(receiver.passes()) + " passes");
    }
    receiver.run_pass(block);
    block = std::max<std::size_t>(1, block / 2);
  }
}

double reconciliation_efficiency(std::uint64_t leakage_bits, std::size_t n, double qber) {
  const double ideal = static_cast<double>(n) * binary_entropy(qber);
  return ideal > 0.0 ? static_cast<double>(leakage_bits) / ideal : 0.0;
}

}  // namespace qkdnet
