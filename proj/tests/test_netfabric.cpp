#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "error.hpp"
#include "keystore.hpp"
#include "netfabric.hpp"
#include "properties.hpp"
#include "scenario.hpp"
#include "support.hpp"

using namespace qkdnet;

namespace {

const Scenario& hefei() {
  static const Scenario sc = load_scenario(test::scenario_path("hefei.yaml"));
  return sc;
}

ConnectionRequest req(std::uint64_t id, std::string src, std::string dst, double at = 0.0, int prio = 0) {
  return {id, std::move(src), std::move(dst), at, prio};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

}  // namespace

TEST_SUITE("netfabric") {
  TEST_CASE("switch basics") {
    SwitchState sw(8);
    sw.connect(1, 2);
    CHECK(sw.status(1) == PortStatus::busy);
    CHECK(sw.peer(2) == 1);
    CHECK(code_of([&] { sw.connect(2, 5); }) == ErrorCode::port_busy);
    CHECK(code_of([&] { sw.connect(3, 3); }) == ErrorCode::self_connection);
    sw.disconnect(1);
    CHECK(sw.status(1) == PortStatus::idle);
    CHECK(sw.status(2) == PortStatus::idle);
    CHECK(code_of([&] { sw.disconnect(1); }) == ErrorCode::not_connected);
    sw.set_offline(4, true);
    CHECK(code_of([&] { sw.connect(4, 5); }) == ErrorCode::port_offline);
    sw.connect(5, 6);
    CHECK(code_of([&] { sw.set_offline(5, true); }) == ErrorCode::port_busy);
    CHECK_THROWS_AS(sw.status(9), Error);
  }

  TEST_CASE("full matching on eight ports") {
    SwitchState sw(8);
    sw.connect(1, 8);
    sw.connect(2, 7);
    sw.connect(3, 6);
    sw.connect(4, 5);
    CHECK(sw.matching().size() == 4);
    for (int p = 1; p <= 8; ++p) CHECK(sw.status(p) == PortStatus::busy);
    sw.check_invariants();
  }

  TEST_CASE("switch agrees with a set model over random operations") {
    const test::SwitchCheck c = test::switch_model_check(2024, 10'000);
    CHECK(c.operations == 10'000);
    CHECK(c.divergences == 0);
    CHECK(c.double_assignments == 0);
    if (!c.first_problem.empty()) MESSAGE(c.first_problem);
  }

  TEST_CASE("direct connect between switched nodes") {
    SwitchState sw(8);
    BusyLinks busy;
    const auto plan = schedule({req(1, "Wanan", "Meilan")}, hefei().topology, sw, busy);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0].action == PlanAction::connect);
    CHECK(plan[0].switch_pairs == std::vector<std::pair<int, int>>{{2, 3}});
    CHECK(sw.peer(2) == 3);
  }

  TEST_CASE("Feixi reaches Wanxi through the relay") {
    const Route r = find_route(hefei().topology, "Feixi", "Wanxi");
    CHECK(r.action == PlanAction::relay);
    CHECK(r.relay == "USTC");
    REQUIRE(r.legs.size() == 2);
    CHECK(r.legs[0] == NodePair::of("Feixi", "USTC"));
    CHECK(r.legs[1] == NodePair::of("USTC", "Wanxi"));
    CHECK(r.switch_pairs == std::vector<std::pair<int, int>>{{1, 4}});
    CHECK(r.fibers == std::vector<NodePair>{NodePair::of("Feixi", "USTC")});
    CHECK(find_route(hefei().topology, "Feixi", "USTC").action == PlanAction::direct_fiber);
  }

  TEST_CASE("requests sharing a port: first connects, second waits") {
    SwitchState sw(8);
    BusyLinks busy;
    const auto plan = schedule({req(1, "USTC", "Wanxi"), req(2, "Meilan", "Wanxi", 0.5)}, hefei().topology, sw, busy);
    REQUIRE(plan.size() == 2);
    CHECK(plan[0].request.id == 1);
    CHECK(plan[0].action == PlanAction::connect);
    CHECK(plan[1].action == PlanAction::wait);
  }

  TEST_CASE("priority before arrival") {
    SwitchState sw(8);
    BusyLinks busy;
    const auto plan =
        schedule({req(1, "USTC", "Wanxi", 0.0, 2), req(2, "Meilan", "Wanxi", 1.0, 0)}, hefei().topology, sw, busy);
    CHECK(plan[0].request.id == 2);
    CHECK(plan[0].action == PlanAction::connect);
    CHECK(plan[1].action == PlanAction::wait);
  }

  TEST_CASE("a waiting request holds its ports") {
    SwitchState sw(8);
    sw.connect(3, 4);  // Meilan-Wanxi already running
    BusyLinks busy;
    const auto plan = schedule({req(1, "Wanan", "Wanxi"), req(2, "Wanan", "USTC", 1.0)}, hefei().topology, sw, busy);
    CHECK(plan[0].action == PlanAction::wait);
    CHECK(plan[1].action == PlanAction::wait);
    CHECK(sw.status(2) == PortStatus::idle);
  }

  TEST_CASE("busy dedicated fiber makes relay requests wait") {
    SwitchState sw(8);
    BusyLinks busy{NodePair::of("Feixi", "USTC")};
    const auto plan = schedule({req(1, "Feixi", "Meilan")}, hefei().topology, sw, busy);
    CHECK(plan[0].action == PlanAction::wait);
  }

  TEST_CASE("unknown nodes are unroutable") {
    SwitchState sw(8);
    BusyLinks busy;
    CHECK(code_of([&] { schedule({req(1, "Hefei", "USTC")}, hefei().topology, sw, busy); }) == ErrorCode::unroutable);
    CHECK(code_of([&] { find_route(hefei().topology, "USTC", "Nowhere"); }) == ErrorCode::unroutable);
  }

  TEST_CASE("schedules are deterministic, never double-book and never starve") {
    std::mt19937_64 g(17);
    const std::vector<std::string> names = {"USTC", "Wanan", "Meilan", "Wanxi", "Feixi"};
    for (int round = 0; round < 50; ++round) {
      std::vector<ConnectionRequest> queue;
      for (std::uint64_t id = 1; id <= 12; ++id) {
        const std::size_t a = g() % names.size();
        std::size_t b = g() % names.size();
        if (a == b) b = (b + 1) % names.size();
        queue.push_back(req(id, names[a], names[b], static_cast<double>(g() % 5), static_cast<int>(g() % 3)));
      }
      // Serve in rounds: everything connected in a round finishes before the next.
      std::set<std::uint64_t> done;
      for (int step = 0; step < 20 && done.size() < queue.size(); ++step) {
        std::vector<ConnectionRequest> pending;
        for (const auto& r : queue)
          if (!done.contains(r.id)) pending.push_back(r);
        SwitchState sw(8), sw2(8);
        BusyLinks busy, busy2;
        const auto plan = schedule(pending, hefei().topology, sw, busy);
        const auto again = schedule(pending, hefei().topology, sw2, busy2);
        REQUIRE(plan.size() == again.size());
        std::map<int, int> ports;
        for (std::size_t i = 0; i < plan.size(); ++i) {
          CHECK(plan[i].request.id == again[i].request.id);
          CHECK(plan[i].action == again[i].action);
          if (plan[i].action == PlanAction::wait) continue;
          done.insert(plan[i].request.id);
          for (auto [x, y] : plan[i].switch_pairs) {
            ++ports[x];
            ++ports[y];
          }
        }
        for (auto [p, n] : ports) CHECK(n == 1);
        sw.check_invariants();
      }
      CHECK(done.size() == queue.size());
    }
  }

  TEST_CASE("relay XOR example") {
    KeyPool a("A", "R"), ra("R", "A"), rb("R", "B"), b("B", "R");
    for (KeyPool* p : {&a, &ra}) p->deposit(std::vector<std::uint8_t>{0x00, 0x0a}, "ar");
    for (KeyPool* p : {&rb, &b}) p->deposit(std::vector<std::uint8_t>{0x00, 0x06}, "rb");
    const RelayOutcome r = relay_compose(a, ra, rb, b, 1);
    CHECK(r.published.message == std::vector<std::uint8_t>{0x0c});
    CHECK(r.key_a == std::vector<std::uint8_t>{0x0a});
    CHECK(r.key_b == std::vector<std::uint8_t>{0x0a});
    CHECK(r.ledger.size() == 4);
  }

  TEST_CASE("zero-length relay") {
    KeyPool a("A", "R"), ra("R", "A"), rb("R", "B"), b("B", "R");
    const RelayOutcome r = relay_compose(a, ra, rb, b, 0);
    CHECK(r.published.message.empty());
    CHECK(a.consumed() + ra.consumed() + rb.consumed() + b.consumed() == 0);
  }

  TEST_CASE("relay exhaustion names the starved pool and consumes nothing") {
    KeyPool a("A", "R"), ra("R", "A"), rb("R", "B"), b("B", "R");
    for (KeyPool* p : {&a, &ra}) p->deposit(std::vector<std::uint8_t>(64, 1), "ar");
    for (KeyPool* p : {&rb, &b}) p->deposit(std::vector<std::uint8_t>(8, 2), "rb");
    try {
      relay_compose(a, ra, rb, b, 16);
      FAIL("expected exhaustion");
    } catch (const KeyExhausted& e) {
      CHECK(e.pool() == rb.label());
    }
    CHECK(ra.reserved() == 0);
    CHECK(ra.consumed() + rb.consumed() == 0);
  }

  TEST_CASE("random relay trials") {
    const test::RelayCheck c = test::relay_trials(99, 10'000);
    CHECK(c.trials == 10'000);
    CHECK(c.key_mismatches == 0);
    CHECK(c.accounting_errors == 0);
    CHECK(c.reuse == 0);
    CHECK(test::byte_uniformity_p(c.published) > 0.001);
  }

  TEST_CASE("chi-square tail sanity") {
    CHECK(test::chi_square_p(255.0, 255.0) == doctest::Approx(0.49).epsilon(0.05));
    CHECK(test::chi_square_p(400.0, 255.0) < 1e-6);
    std::vector<std::uint8_t> skewed(100'000, 0);
    CHECK(test::byte_uniformity_p(skewed) < 1e-10);
  }
}
