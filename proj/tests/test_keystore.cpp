#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <random>

#include "error.hpp"
#include "keystore.hpp"
#include "rng.hpp"

using namespace qkdnet;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

std::vector<std::uint8_t> iota_bytes(std::size_t n, std::uint8_t start = 0) {
  std::vector<std::uint8_t> v(n);
  std::iota(v.begin(), v.end(), start);
  return v;
}

// Two endpoint copies with the same deposits.
std::pair<KeyPool, KeyPool> twin(const std::vector<std::uint8_t>& key) {
  KeyPool a("A", "B"), b("B", "A");
  a.deposit(key, "s1");
  b.deposit(key, "s1");
  return {std::move(a), std::move(b)};
}

}  // namespace

TEST_SUITE("keystore-app") {
  TEST_CASE("pair names are sorted and distinct") {
    CHECK(NodePair::of("USTC", "Feixi") == NodePair::of("Feixi", "USTC"));
    CHECK(NodePair::of("USTC", "Feixi").first == "Feixi");
    CHECK_THROWS_AS(NodePair::of("A", "A"), Error);
    KeyPool p("USTC", "Feixi");
    CHECK(p.label() == "Feixi-USTC@USTC");
    CHECK(p.send_lane() == Lane::backward);
  }

  TEST_CASE("deposits grow the pool in order") {
    KeyPool p("A", "B");
    p.deposit(iota_bytes(32), "s1");
    CHECK(p.total_bytes() == 32);
    CHECK(p.available() == 32);
    CHECK(p.available(Lane::forward) == 16);
    CHECK(p.available(Lane::backward) == 16);
    p.deposit(iota_bytes(5, 32), "s2");
    CHECK(p.blocks().size() == 2);
    CHECK(p.blocks()[1].provenance == "s2");
    for (std::size_t i = 0; i < 37; ++i) CHECK(p.byte_at(i) == i);
    CHECK(p.lane_capacity(Lane::forward) == 19);
    CHECK(p.lane_capacity(Lane::backward) == 18);
  }

  TEST_CASE("random deposits keep the accounting exact") {
    std::mt19937_64 g(1);
    KeyPool p("A", "B");
    std::size_t sum = 0;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = 1 + g() % 97;
      p.deposit(std::vector<std::uint8_t>(n, 7), "d");
      sum += n;
    }
    CHECK(p.total_bytes() == sum);
    CHECK(p.available() == sum);
    CHECK(p.consumed() == 0);
  }

  TEST_CASE("lanes interleave even and odd positions") {
    KeyPool p("A", "B");
    p.deposit(iota_bytes(10), "s");
    const auto r = p.reserve(Lane::forward, 3);
    CHECK(p.take(r) == std::vector<std::uint8_t>{0, 2, 4});
    const auto s = p.reserve(Lane::backward, 2);
    CHECK(p.take(s) == std::vector<std::uint8_t>{1, 3});
    CHECK(p.byte_at(0) == 0);
    CHECK(p.byte_at(2) == 0);
    CHECK(p.byte_at(6) == 6);
    CHECK(KeyPool::position_of(Lane::backward, 4) == 9);
  }

  TEST_CASE("reserve, cancel and ordering") {
    KeyPool p("A", "B");
    p.deposit(iota_bytes(20), "s");
    const auto r1 = p.reserve(Lane::forward, 3);
    const auto r2 = p.reserve(Lane::forward, 2);
    CHECK(p.reserved(Lane::forward) == 5);
    CHECK_THROWS_AS(p.cancel(r1), Error);
    CHECK_THROWS_AS(p.take(r2), Error);
    p.cancel(r2);
    CHECK(p.reserved(Lane::forward) == 3);
    p.take(r1);
    CHECK(p.consumed(Lane::forward) == 3);
    CHECK(p.available(Lane::forward) == 7);
  }

  TEST_CASE("exhaustion reports the shortfall") {
    KeyPool p("A", "B");
    p.deposit(iota_bytes(10), "s");
    try {
      p.reserve(Lane::forward, 8);
      FAIL("expected exhaustion");
    } catch (const KeyExhausted& e) {
      CHECK(e.code() == ErrorCode::key_exhausted);
      CHECK(e.shortfall() == 3);
      CHECK(e.pool() == "A-B@A");
    }
    CHECK(p.reserved() == 0);
  }

  TEST_CASE("all-zero and all-one keys") {
    KeyPool z("A", "B");
    z.deposit(std::vector<std::uint8_t>(8, 0), "z");
    const std::vector<std::uint8_t> msg = {0x12, 0x34, 0xab, 0xcd};
    CHECK(otp_encrypt(z, msg).ciphertext == msg);
    KeyPool o("A", "B");
    o.deposit(std::vector<std::uint8_t>(8, 0xff), "o");
    CHECK(otp_encrypt(o, msg).ciphertext == std::vector<std::uint8_t>{0xed, 0xcb, 0x54, 0x32});
  }

  TEST_CASE("1 KiB round trip, replay refused") {
    Rng rng(5);
    auto [a, b] = twin(rng.bytes(4096));
    const auto m = rng.bytes(1024);
    const OtpMessage c = otp_encrypt(a, m);
    CHECK(a.consumed() == 1024);
    CHECK(otp_decrypt(b, c) == m);
    CHECK(b.consumed(Lane::forward) == 1024);
    CHECK(code_of([&] { otp_decrypt(b, c); }) == ErrorCode::key_reuse_refused);
    for (std::size_t i = 0; i < 1024; ++i) CHECK(a.byte_at(KeyPool::position_of(Lane::forward, i)) == 0);
  }

  TEST_CASE("out-of-range offset means desynchronized pools") {
    Rng rng(6);
    auto [a, b] = twin(rng.bytes(64));
    OtpMessage c = otp_encrypt(a, rng.bytes(8));
    c.offset = 40;
    CHECK(code_of([&] { otp_decrypt(b, c); }) == ErrorCode::desynchronized_pools);
  }

  TEST_CASE("decrypt checks pair and direction") {
    Rng rng(7);
    auto [a, b] = twin(rng.bytes(64));
    const OtpMessage c = otp_encrypt(a, rng.bytes(4));
    KeyPool other("B", "C");
    other.deposit(rng.bytes(64), "x");
    CHECK_THROWS_AS(otp_decrypt(other, c), Error);
    CHECK_THROWS_AS(otp_decrypt(a, c), Error);
  }

  TEST_CASE("interleaved bidirectional traffic never collides") {
    Rng rng(8);
    const auto key = rng.bytes(20'000);
    auto [a, b] = twin(key);
    std::mt19937_64 g(9);
    std::vector<std::uint8_t> used(key.size(), 0);
    for (int i = 0; i < 400; ++i) {
      const bool forward = g() & 1;
      KeyPool& tx = forward ? a : b;
      KeyPool& rx = forward ? b : a;
      const auto m = rng.bytes(1 + g() % 40);
      if (tx.available(tx.send_lane()) < m.size()) continue;
      const OtpMessage c = otp_encrypt(tx, m);
      CHECK(otp_decrypt(rx, c) == m);
      for (std::size_t k = 0; k < m.size(); ++k) {
        const std::size_t pos = KeyPool::position_of(tx.send_lane(), c.offset + k);
        CHECK(used[pos] == 0);
        used[pos] = 1;
      }
    }
    CHECK(a.consumed() == b.consumed());
  }

  TEST_CASE("serialization round trip") {
    Rng rng(10);
    KeyPool p("Wanxi", "Meilan");
    p.deposit(rng.bytes(100), "session-1");
    p.deposit(rng.bytes(51), "session-2");
    p.take(p.reserve(p.send_lane(), 7));
    p.take_at(Lane::forward, 0, 4);
    const auto bytes = p.serialize();
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == std::string("QKDPOOL\0", 8));
    const KeyPool q = KeyPool::deserialize(bytes);
    CHECK(q.owner() == "Wanxi");
    CHECK(q.pair() == p.pair());
    CHECK(q.total_bytes() == 151);
    CHECK(q.consumed(Lane::forward) == 4);
    CHECK(q.consumed(Lane::backward) == 7);
    CHECK(q.blocks().size() == 2);
    for (std::size_t i = 0; i < 151; ++i) CHECK(q.byte_at(i) == p.byte_at(i));
    CHECK(q.serialize() == bytes);

    const auto path = std::filesystem::temp_directory_path() / "qkdnet_pool_test.bin";
    p.save(path);
    CHECK(KeyPool::load(path).serialize() == bytes);
    std::filesystem::remove(path);
  }

  TEST_CASE("corrupt pool files are rejected") {
    KeyPool p("A", "B");
    p.deposit(iota_bytes(16), "s");
    auto bytes = p.serialize();
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(KeyPool::deserialize(bad), Error);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(KeyPool::deserialize(bad), Error);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(KeyPool::deserialize(bad), Error);
  }
}
