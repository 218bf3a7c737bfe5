#include "keystore.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

namespace qkdnet {

NodePair NodePair::of(std::string a, std::string b) {
  require(a != b, ErrorCode::invalid_argument, "a node pair needs two distinct nodes");
  if (b < a) std::swap(a, b);
  return NodePair{std::move(a), std::move(b)};
}

const std::string& NodePair::other(const std::string& node) const {
  if (node == first) return second;
  if (node == second) return first;
  fail(ErrorCode::not_found, "node " + node + " is not part of pair " + label());
}

KeyExhausted::KeyExhausted(std::string pool, std::size_t shortfall)
    : Error(ErrorCode::key_exhausted,
            "key exhausted: pool " + pool + " short by " + std::to_string(shortfall) + " bytes"),
      pool_(std::move(pool)),
      shortfall_(shortfall) {}

KeyPool::KeyPool(std::string owner, std::string peer) : owner_(owner), pair_(NodePair::of(owner, std::move(peer))) {}

KeyPool::KeyPool(KeyPool&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  owner_ = std::move(other.owner_);
  pair_ = std::move(other.pair_);
  bytes_ = std::move(other.bytes_);
  blocks_ = std::move(other.blocks_);
  lanes_[0] = other.lanes_[0];
  lanes_[1] = other.lanes_[1];
}

KeyPool& KeyPool::operator=(KeyPool&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    owner_ = std::move(other.owner_);
    pair_ = std::move(other.pair_);
    bytes_ = std::move(other.bytes_);
    blocks_ = std::move(other.blocks_);
    lanes_[0] = other.lanes_[0];
    lanes_[1] = other.lanes_[1];
  }
  return *this;
}

std::string KeyPool::label() const {
  return pair_.label() + "@" + owner_;
}

Lane KeyPool::lane_from(const std::string& sender) const {
  if (sender == pair_.first) return Lane::forward;
  if (sender == pair_.second) return Lane::backward;
  fail(ErrorCode::not_found, "node " + sender + " is not part of pair " + pair_.label());
}

void KeyPool::deposit(std::span<const std::uint8_t> key, std::string provenance) {
  require(!key.empty(), ErrorCode::invalid_argument, "deposit: empty key");
  std::lock_guard lock(mutex_);
  bytes_.insert(bytes_.end(), key.begin(), key.end());
  blocks_.push_back({std::move(provenance), key.size()});
}

std::size_t KeyPool::capacity_locked(Lane lane) const {
  const std::size_t total = bytes_.size();
  return lane == Lane::forward ? (total + 1) / 2 : total / 2;
}

std::size_t KeyPool::total_bytes() const {
  std::lock_guard lock(mutex_);
  return bytes_.size();
}

std::size_t KeyPool::lane_capacity(Lane lane) const {
  std::lock_guard lock(mutex_);
  return capacity_locked(lane);
}

std::size_t KeyPool::consumed(Lane lane) const {
  std::lock_guard lock(mutex_);
  return lanes_[static_cast<int>(lane)].consumed;
}

std::size_t KeyPool::reserved(Lane lane) const {
  std::lock_guard lock(mutex_);
  return lanes_[static_cast<int>(lane)].reserved;
}

std::size_t KeyPool::available(Lane lane) const {
  std::lock_guard lock(mutex_);
  return capacity_locked(lane) - lanes_[static_cast<int>(lane)].reserved;
}

std::size_t KeyPool::consumed() const { return consumed(Lane::forward) + consumed(Lane::backward); }
std::size_t KeyPool::reserved() const { return reserved(Lane::forward) + reserved(Lane::backward); }
std::size_t KeyPool::available() const { return available(Lane::forward) + available(Lane::backward); }

std::vector<KeyBlockInfo> KeyPool::blocks() const {
  std::lock_guard lock(mutex_);
  return blocks_;
}

KeyPool::Reservation KeyPool::reserve(Lane lane, std::size_t n) {
  std::lock_guard lock(mutex_);
  LaneState& s = lanes_[static_cast<int>(lane)];
  const std::size_t free = capacity_locked(lane) - s.reserved;
  if (n > free) throw KeyExhausted(label(), n - free);
  Reservation r{lane, s.reserved, n};
  s.reserved += n;
  return r;
}

std::vector<std::uint8_t> KeyPool::extract_locked(Lane lane, std::uint64_t from, std::uint64_t to,
                                                  std::uint64_t keep_from) {
  std::vector<std::uint8_t> out;
  out.reserve(to - keep_from);
  for (std::uint64_t i = from; i < to; ++i) {
    std::uint8_t& b = bytes_[position_of(lane, i)];
    if (i >= keep_from) out.push_back(b);
    b = 0;
  }
  return out;
}

std::vector<std::uint8_t> KeyPool::take(const Reservation& r) {
  std::lock_guard lock(mutex_);
  LaneState& s = lanes_[static_cast<int>(r.lane)];
  require(r.offset == s.consumed && r.offset + r.length <= s.reserved, ErrorCode::invalid_argument,
          "take: reservation is not the next one in its lane");
  auto out = extract_locked(r.lane, r.offset, r.offset + r.length, r.offset);
  s.consumed += r.length;
  return out;
}

void KeyPool::cancel(const Reservation& r) {
  std::lock_guard lock(mutex_);
  LaneState& s = lanes_[static_cast<int>(r.lane)];
  require(r.offset + r.length == s.reserved && r.offset >= s.consumed, ErrorCode::invalid_argument,
          "cancel: only the latest untaken reservation can be returned");
  s.reserved = r.offset;
}

std::vector<std::uint8_t> KeyPool::take_at(Lane lane, std::uint64_t offset, std::size_t n) {
  std::lock_guard lock(mutex_);
  LaneState& s = lanes_[static_cast<int>(lane)];
  if (offset < s.consumed) {
    fail(ErrorCode::key_reuse_refused, "key reuse refused: " + label() + " offset " + std::to_string(offset) +
                                           " is below the consumed watermark " + std::to_string(s.consumed));
  }
  if (s.reserved > s.consumed) {
    fail(ErrorCode::desynchronized_pools,
         "desynchronized pools: " + label() + " has local reservations in the peer's lane");
  }
  if (offset + n > capacity_locked(lane)) {
    fail(ErrorCode::desynchronized_pools, "desynchronized pools: " + label() + " holds no key at offset " +
                                              std::to_string(offset) + "+" + std::to_string(n));
  }
  auto out = extract_locked(lane, s.consumed, offset + n, offset);
  s.consumed = offset + n;
  s.reserved = s.consumed;
  return out;
}

std::uint8_t KeyPool::byte_at(std::size_t position) const {
  std::lock_guard lock(mutex_);
  require(position < bytes_.size(), ErrorCode::invalid_argument, "byte_at: position beyond pool");
  return bytes_[position];
}

// ---- persistence ----------------------------------------------------------

namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'Q', 'K', 'D', 'P', 'O', 'O', 'L', 0};
constexpr std::uint16_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_string(const std::string& s) {
    require(s.size() <= 0xFFFF, ErrorCode::invalid_argument, "string too long for pool file");
    put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint16_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> get_bytes(std::uint64_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) fail(ErrorCode::parse, "pool file truncated");
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> KeyPool::serialize() const {
  std::lock_guard lock(mutex_);
  Writer w;
  w.out.insert(w.out.end(), kMagic.begin(), kMagic.end());
  w.put<std::uint16_t>(kVersion);
  w.put<std::uint16_t>(0);
  w.put_string(owner_);
  w.put_string(pair_.first);
  w.put_string(pair_.second);
  for (const LaneState& s : lanes_) {
    w.put<std::uint64_t>(s.consumed);
    w.put<std::uint64_t>(s.reserved);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(blocks_.size()));
  std::size_t at = 0;
  for (const KeyBlockInfo& b : blocks_) {
    w.put_string(b.provenance);
    w.put<std::uint64_t>(b.length);
    w.out.insert(w.out.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(at),
                 bytes_.begin() + static_cast<std::ptrdiff_t>(at + b.length));
    at += b.length;
  }
  return std::move(w.out);
}

KeyPool KeyPool::deserialize(std::span<const std::uint8_t> data) {
  Reader r(data);
  const auto magic = r.get_bytes(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) fail(ErrorCode::parse, "not a key pool file");
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion) fail(ErrorCode::parse, "unsupported key pool file version " + std::to_string(version));
  r.get<std::uint16_t>();
  std::string owner = r.get_string();
  std::string first = r.get_string();
  std::string second = r.get_string();
  if (owner != first && owner != second) fail(ErrorCode::parse, "pool owner is not part of its pair");
  KeyPool pool(owner, owner == first ? second : first);
  if (pool.pair_.first != first) fail(ErrorCode::parse, "pool pair names are not sorted");
  for (LaneState& s : pool.lanes_) {
    s.consumed = r.get<std::uint64_t>();
    s.reserved = r.get<std::uint64_t>();
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string provenance = r.get_string();
    const auto length = r.get<std::uint64_t>();
    const auto bytes = r.get_bytes(length);
    pool.bytes_.insert(pool.bytes_.end(), bytes.begin(), bytes.end());
    pool.blocks_.push_back({std::move(provenance), length});
  }
  if (!r.done()) fail(ErrorCode::parse, "trailing bytes after key pool");
  for (Lane lane : {Lane::forward, Lane::backward}) {
    const LaneState& s = pool.lanes_[static_cast<int>(lane)];
    if (s.consumed > s.reserved || s.reserved > pool.capacity_locked(lane)) {
      fail(ErrorCode::parse, "key pool watermarks inconsistent with its contents");
    }
  }
  return pool;
}

void KeyPool::save(const std::filesystem::path& path) const {
  const auto data = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

KeyPool KeyPool::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(data);
}

// ---- one-time pad ---------------------------------------------------------

OtpMessage otp_encrypt(KeyPool& sender_pool, std::span<const std::uint8_t> plaintext) {
  const auto reservation = sender_pool.reserve(sender_pool.send_lane(), plaintext.size());
  const auto key = sender_pool.take(reservation);
  OtpMessage msg{sender_pool.pair(), sender_pool.owner(), reservation.offset, {}};
  msg.ciphertext.resize(plaintext.size());
  for (std::size_t i = 0; i < plaintext.size(); ++i) msg.ciphertext[i] = plaintext[i] ^ key[i];
  return msg;
}

std::vector<std::uint8_t> otp_decrypt(KeyPool& receiver_pool, const OtpMessage& message) {
  if (message.pair != receiver_pool.pair()) {
    fail(ErrorCode::invalid_argument,
         "message belongs to pair " + message.pair.label() + ", not " + receiver_pool.pair().label());
  }
  require(message.sender != receiver_pool.owner(), ErrorCode::invalid_argument,
          "a pool copy cannot decrypt its own outgoing messages");
  const auto key = receiver_pool.take_at(receiver_pool.lane_from(message.sender), message.offset,
                                         message.ciphertext.size());
  std::vector<std::uint8_t> plain(message.ciphertext.size());
  for (std::size_t i = 0; i < plain.size(); ++i) plain[i] = message.ciphertext[i] ^ key[i];
  return plain;
}

}  // namespace qkdnet
