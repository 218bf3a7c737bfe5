#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "keystore.hpp"
#include "phys_model.hpp"

namespace qkdnet {

struct NodeInfo {
  std::string name;
  bool terminal = true;
  bool relay = false;
  /// Switch port, 1-based; empty for nodes reached over a dedicated fiber.
  std::optional<int> port;
};

/// Nodes, the QKD links between them and their switch attachments. Links are
/// directional (sender first); either direction serves a pair.
class NetworkTopology {
 public:
  void add_node(NodeInfo node);
  void add_link(const std::string& from, const std::string& to, LinkParams params);

  bool has_node(const std::string& name) const { return nodes_.contains(name); }
  const NodeInfo& node(const std::string& name) const;
  const std::map<std::string, NodeInfo>& nodes() const { return nodes_; }
  std::optional<int> port_of(const std::string& name) const;
  std::optional<std::string> node_at_port(int port) const;
  bool switched(const std::string& name) const { return port_of(name).has_value(); }

  /// Link (from, to) if defined, else (to, from), else null.
  const LinkParams* find_link(const std::string& from, const std::string& to) const;
  const std::map<std::pair<std::string, std::string>, LinkParams>& links() const { return links_; }
  /// Fiber plus insertion loss of the pair's link, in dB.
  std::optional<double> pair_loss_db(const std::string& a, const std::string& b) const;

  /// Throws Error(invalid_argument) on dangling references or port clashes.
  void validate(int port_count) const;

 private:
  std::map<std::string, NodeInfo> nodes_;
  std::map<std::pair<std::string, std::string>, LinkParams> links_;
};

enum class PortStatus : std::uint8_t { idle, busy, offline };

const char* to_string(PortStatus s);

/// All-pass optical switch: any two ports can be joined, each port in at most
/// one pair.
class SwitchState {
 public:
  explicit SwitchState(int port_count = 8);

  int port_count() const { return static_cast<int>(status_.size()); }
  PortStatus status(int port) const;
  std::optional<int> peer(int port) const;
  /// Sorted pairs (low port first).
  std::vector<std::pair<int, int>> matching() const;

  void connect(int a, int b);
  void disconnect(int port);
  /// A connected port cannot be taken offline.
  void set_offline(int port, bool offline);

  /// Throws Error(internal) when the matching and statuses disagree.
  void check_invariants() const;

 private:
  std::size_t slot(int port) const;

  std::vector<PortStatus> status_;
  std::vector<int> peer_;
};

struct ConnectionRequest {
  std::uint64_t id = 0;
  std::string src;
  std::string dst;
  double arrival = 0.0;
  /// 0 is the most urgent.
  int priority = 0;
};

enum class PlanAction : std::uint8_t { connect, direct_fiber, relay, wait };

const char* to_string(PlanAction a);

/// Resources one connection needs: a direct hop, or two hops via a relay.
struct Route {
  PlanAction action = PlanAction::wait;
  std::string relay;
  std::vector<NodePair> legs;
  std::vector<std::pair<int, int>> switch_pairs;
  std::vector<NodePair> fibers;
  double loss_db = 0.0;
};

/// Direct when the pair has a link; otherwise through the relay-capable node
/// with the least total loss (ties go to the first name).
/// Throws Error(unroutable) for unknown nodes or when no route exists.
Route find_route(const NetworkTopology& topo, const std::string& src, const std::string& dst);

/// Busy resources outside the switch: dedicated fibers in use.
using BusyLinks = std::set<NodePair>;

struct PlanStep {
  ConnectionRequest request;
  PlanAction action = PlanAction::wait;
  std::string relay;
  /// QKD sessions to run, one per hop.
  std::vector<NodePair> legs;
  std::vector<std::pair<int, int>> switch_pairs;
  std::vector<NodePair> fibers;
  double loss_db = 0.0;
};

/// Assigns resources to the queued requests, highest priority first and FIFO
/// by arrival within a priority. A request that cannot be served now waits and
/// holds a claim on the ports and fibers it needs, so later requests cannot
/// overtake it on those resources. Connections made for earlier requests are
/// applied to `sw` and `busy` as the plan is built.
///
/// Throws Error(unroutable) for unknown nodes or pairs with no route.
std::vector<PlanStep> schedule(std::vector<ConnectionRequest> queue, const NetworkTopology& topo, SwitchState& sw,
                               BusyLinks& busy);

/// Relay's side of XOR forwarding: draws K1 from its pool with A and K2 from
/// its pool with B (its own sending lanes) and publishes M = K1 ^ K2.
struct RelayMessage {
  std::string relay;
  std::string a;
  std::string b;
  std::uint64_t offset_ar = 0;
  std::uint64_t offset_rb = 0;
  std::vector<std::uint8_t> message;
};

/// Both reservations are made before any byte is taken; when either pool is
/// short nothing is consumed and KeyExhausted names that pool.
RelayMessage relay_publish(KeyPool& relay_ar, KeyPool& relay_rb, std::size_t length);
/// A's key: K1, read from A's copy of the A-R pool.
std::vector<std::uint8_t> relay_accept_a(KeyPool& a_copy, const RelayMessage& msg);
/// B's key: M ^ K2, with K2 read from B's copy of the R-B pool.
std::vector<std::uint8_t> relay_accept_b(KeyPool& b_copy, const RelayMessage& msg);

struct ConsumptionEntry {
  std::string pool;
  Lane lane = Lane::forward;
  std::uint64_t offset = 0;
  std::size_t length = 0;
};

struct RelayOutcome {
  std::vector<std::uint8_t> key_a;
  std::vector<std::uint8_t> key_b;
  RelayMessage published;
  std::vector<ConsumptionEntry> ledger;
};

/// Full exchange over the four pool copies (A and R share A-R, R and B share R-B).
RelayOutcome relay_compose(KeyPool& a_copy, KeyPool& relay_ar, KeyPool& relay_rb, KeyPool& b_copy,
                           std::size_t length);

}  // namespace qkdnet
