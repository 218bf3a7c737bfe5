#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace qkdnet {

/// Unordered pair of node names, stored sorted.
struct NodePair {
  std::string first;
  std::string second;

  static NodePair of(std::string a, std::string b);
  bool contains(const std::string& node) const { return first == node || second == node; }
  const std::string& other(const std::string& node) const;
  std::string label() const { return first + "-" + second; }
  auto operator<=>(const NodePair&) const = default;
};

/// Each pool is split into two interleaved lanes so the two directions of a
/// pair never contend for the same bytes: lane 0 (first -> second) owns the
/// even byte positions, lane 1 (second -> first) the odd ones.
enum class Lane : std::uint8_t { forward = 0, backward = 1 };

class KeyExhausted : public Error {
 public:
  KeyExhausted(std::string pool, std::size_t shortfall);
  const std::string& pool() const { return pool_; }
  std::size_t shortfall() const { return shortfall_; }

 private:
  std::string pool_;
  std::size_t shortfall_;
};

struct KeyBlockInfo {
  std::string provenance;
  std::uint64_t length = 0;
};

/// One endpoint's copy of the secret key shared by a node pair. Both endpoints
/// hold their own KeyPool with identical deposits; they stay in step as long
/// as both apply the same operations in the same order.
///
/// Bytes are consumed strictly in order within a lane and zeroed as soon as
/// they are handed out. All members lock the pool's mutex.
class KeyPool {
 public:
  struct Reservation {
    Lane lane = Lane::forward;
    std::uint64_t offset = 0;
    std::size_t length = 0;
  };

  KeyPool(std::string owner, std::string peer);
  KeyPool(KeyPool&& other) noexcept;
  KeyPool& operator=(KeyPool&& other) noexcept;
  KeyPool(const KeyPool&) = delete;
  KeyPool& operator=(const KeyPool&) = delete;

  const NodePair& pair() const { return pair_; }
  const std::string& owner() const { return owner_; }
  const std::string& peer() const { return pair_.other(owner_); }
  std::string label() const;

  Lane lane_from(const std::string& sender) const;
  Lane send_lane() const { return lane_from(owner_); }

  void deposit(std::span<const std::uint8_t> key, std::string provenance);

  std::size_t total_bytes() const;
  std::size_t lane_capacity(Lane lane) const;
  std::size_t consumed(Lane lane) const;
  std::size_t reserved(Lane lane) const;
  /// Bytes that can still be reserved in the lane.
  std::size_t available(Lane lane) const;
  std::size_t consumed() const;
  std::size_t reserved() const;
  std::size_t available() const;
  std::vector<KeyBlockInfo> blocks() const;

  /// Claims the next n bytes of the lane. Throws KeyExhausted with the shortfall.
  Reservation reserve(Lane lane, std::size_t n);
  /// Hands out and zeroes a reservation. Reservations are taken in order.
  std::vector<std::uint8_t> take(const Reservation& r);
  /// Returns the most recent untaken reservation to the pool.
  void cancel(const Reservation& r);
  /// Receiving side: hands out and zeroes n bytes at a lane offset chosen by
  /// the peer. Bytes skipped over are zeroed too.
  /// Throws Error(key_reuse_refused) for an offset below the watermark and
  /// Error(desynchronized_pools) for a range beyond this copy's key.
  std::vector<std::uint8_t> take_at(Lane lane, std::uint64_t offset, std::size_t n);

  /// Raw view of byte `position` (absolute, across both lanes); for audits.
  std::uint8_t byte_at(std::size_t position) const;
  static std::size_t position_of(Lane lane, std::uint64_t lane_offset) {
    return 2 * lane_offset + static_cast<std::size_t>(lane);
  }

  std::vector<std::uint8_t> serialize() const;
  static KeyPool deserialize(std::span<const std::uint8_t> data);
  void save(const std::filesystem::path& path) const;
  static KeyPool load(const std::filesystem::path& path);

 private:
  struct LaneState {
    std::uint64_t consumed = 0;
    std::uint64_t reserved = 0;
  };

  std::size_t capacity_locked(Lane lane) const;
  std::vector<std::uint8_t> extract_locked(Lane lane, std::uint64_t from, std::uint64_t to, std::uint64_t keep_from);

  std::string owner_;
  NodePair pair_;
  std::vector<std::uint8_t> bytes_;
  std::vector<KeyBlockInfo> blocks_;
  LaneState lanes_[2];
  mutable std::mutex mutex_;
};

/// An encrypted message. `offset` is the lane offset of the first key byte.
struct OtpMessage {
  NodePair pair;
  std::string sender;
  std::uint64_t offset = 0;
  std::vector<std::uint8_t> ciphertext;
};

/// XORs the plaintext with the next unused bytes of the sender's lane.
OtpMessage otp_encrypt(KeyPool& sender_pool, std::span<const std::uint8_t> plaintext);

/// Decrypts on the receiving copy, consuming the referenced key bytes.
std::vector<std::uint8_t> otp_decrypt(KeyPool& receiver_pool, const OtpMessage& message);

}  // namespace qkdnet
