#include "netfabric.hpp"

#include <algorithm>
#include <limits>

#include "error.hpp"

namespace qkdnet {

// ---- topology -------------------------------------------------------------

void NetworkTopology::add_node(NodeInfo node) {
  require(!node.name.empty(), ErrorCode::invalid_argument, "node name must not be empty");
  if (nodes_.contains(node.name)) fail(ErrorCode::invalid_argument, "duplicate node " + node.name);
  nodes_.emplace(node.name, std::move(node));
}

void NetworkTopology::add_link(const std::string& from, const std::string& to, LinkParams params) {
  if (!has_node(from) || !has_node(to)) fail(ErrorCode::not_found, "link " + from + "-" + to + " names an unknown node");
  require(from != to, ErrorCode::self_connection, "self-connection: a link needs two distinct nodes");
  auto key = std::make_pair(from, to);
  if (links_.contains(key)) fail(ErrorCode::invalid_argument, "duplicate link " + from + "-" + to);
  links_.emplace(std::move(key), std::move(params));
}

const NodeInfo& NetworkTopology::node(const std::string& name) const {
  auto it = nodes_.find(name);
  if (it == nodes_.end()) fail(ErrorCode::unroutable, "unroutable: unknown node " + name);
  return it->second;
}

std::optional<int> NetworkTopology::port_of(const std::string& name) const { return node(name).port; }

std::optional<std::string> NetworkTopology::node_at_port(int port) const {
  for (const auto& [name, info] : nodes_) {
    if (info.port == port) return name;
  }
  return std::nullopt;
}

const LinkParams* NetworkTopology::find_link(const std::string& from, const std::string& to) const {
  if (auto it = links_.find({from, to}); it != links_.end()) return &it->second;
  if (auto it = links_.find({to, from}); it != links_.end()) return &it->second;
  return nullptr;
}

std::optional<double> NetworkTopology::pair_loss_db(const std::string& a, const std::string& b) const {
  const LinkParams* link = find_link(a, b);
  if (!link) return std::nullopt;
  return link->fiber_loss_db + link->insertion_loss_db;
}

void NetworkTopology::validate(int port_count) const {
  std::set<int> used;
  for (const auto& [name, info] : nodes_) {
    if (!info.port) continue;
    if (*info.port < 1 || *info.port > port_count) {
      fail(ErrorCode::invalid_argument, "node " + name + " uses port " + std::to_string(*info.port) +
                                            " outside 1.." + std::to_string(port_count));
    }
    if (!used.insert(*info.port).second) {
      fail(ErrorCode::invalid_argument, "port " + std::to_string(*info.port) + " is attached to two nodes");
    }
  }
  for (const auto& [key, link] : links_) {
    if (!has_node(key.first) || !has_node(key.second)) {
      fail(ErrorCode::not_found, "link " + key.first + "-" + key.second + " names an unknown node");
    }
  }
}

// ---- switch ---------------------------------------------------------------

const char* to_string(PortStatus s) {
  switch (s) {
    case PortStatus::idle: return "idle";
    case PortStatus::busy: return "busy";
    case PortStatus::offline: return "offline";
  }
  return "?";
}

SwitchState::SwitchState(int port_count) {
  require(port_count >= 2, ErrorCode::invalid_argument, "a switch needs at least two ports");
  status_.assign(static_cast<std::size_t>(port_count), PortStatus::idle);
  peer_.assign(static_cast<std::size_t>(port_count), 0);
}

std::size_t SwitchState::slot(int port) const {
  if (port < 1 || port > port_count()) fail(ErrorCode::invalid_argument, "no such port " + std::to_string(port));
  return static_cast<std::size_t>(port - 1);
}

PortStatus SwitchState::status(int port) const { return status_[slot(port)]; }

std::optional<int> SwitchState::peer(int port) const {
  const int p = peer_[slot(port)];
  if (p == 0) return std::nullopt;
  return p;
}

std::vector<std::pair<int, int>> SwitchState::matching() const {
  std::vector<std::pair<int, int>> out;
  for (int p = 1; p <= port_count(); ++p) {
    const int q = peer_[slot(p)];
    if (q > p) out.emplace_back(p, q);
  }
  return out;
}

void SwitchState::connect(int a, int b) {
  const std::size_t sa = slot(a);
  const std::size_t sb = slot(b);
  if (a == b) fail(ErrorCode::self_connection, "self-connection on port " + std::to_string(a));
  for (std::size_t s : {sa, sb}) {
    const int port = static_cast<int>(s) + 1;
    if (status_[s] == PortStatus::offline) fail(ErrorCode::port_offline, "port offline: " + std::to_string(port));
    if (status_[s] == PortStatus::busy) fail(ErrorCode::port_busy, "port busy: " + std::to_string(port));
  }
  status_[sa] = status_[sb] = PortStatus::busy;
  peer_[sa] = b;
  peer_[sb] = a;
}

void SwitchState::disconnect(int port) {
  const std::size_t s = slot(port);
  const int other = peer_[s];
  if (other == 0) fail(ErrorCode::not_connected, "not connected: port " + std::to_string(port));
  const std::size_t o = slot(other);
  status_[s] = status_[o] = PortStatus::idle;
  peer_[s] = peer_[o] = 0;
}

void SwitchState::set_offline(int port, bool offline) {
  const std::size_t s = slot(port);
  if (offline) {
    if (status_[s] == PortStatus::busy) fail(ErrorCode::port_busy, "port busy: " + std::to_string(port));
    status_[s] = PortStatus::offline;
  } else if (status_[s] == PortStatus::offline) {
    status_[s] = PortStatus::idle;
  }
}

void SwitchState::check_invariants() const {
  for (int p = 1; p <= port_count(); ++p) {
    const std::size_t s = slot(p);
    const int q = peer_[s];
    if (q == 0) {
      if (status_[s] == PortStatus::busy) fail(ErrorCode::internal, "busy port without a peer");
      continue;
    }
    if (q == p || q < 1 || q > port_count()) fail(ErrorCode::internal, "port paired with itself or out of range");
    if (peer_[slot(q)] != p) fail(ErrorCode::internal, "asymmetric matching");
    if (status_[s] != PortStatus::busy) fail(ErrorCode::internal, "paired port not marked busy");
  }
}

// ---- scheduler ------------------------------------------------------------

const char* to_string(PlanAction a) {
  switch (a) {
    case PlanAction::connect: return "connect";
    case PlanAction::direct_fiber: return "direct-fiber";
    case PlanAction::relay: return "relay";
    case PlanAction::wait: return "wait";
  }
  return "?";
}

namespace {

// One hop: switched when both ends sit on the switch, otherwise a dedicated fiber.
std::optional<Route> hop(const NetworkTopology& topo, const std::string& a, const std::string& b) {
  const auto loss = topo.pair_loss_db(a, b);
  if (!loss) return std::nullopt;
  Route r;
  r.legs.push_back(NodePair::of(a, b));
  r.loss_db = *loss;
  const auto pa = topo.port_of(a);
  const auto pb = topo.port_of(b);
  if (pa && pb) {
    r.action = PlanAction::connect;
    r.switch_pairs.emplace_back(std::min(*pa, *pb), std::max(*pa, *pb));
  } else {
    r.action = PlanAction::direct_fiber;
    r.fibers.push_back(NodePair::of(a, b));
  }
  return r;
}

}  // namespace

Route find_route(const NetworkTopology& topo, const std::string& src, const std::string& dst) {
  topo.node(src);
  topo.node(dst);
  if (src == dst) fail(ErrorCode::unroutable, "unroutable: " + src + " to itself");
  if (auto direct = hop(topo, src, dst)) return *direct;
  std::optional<Route> best;
  for (const auto& [name, info] : topo.nodes()) {
    if (!info.relay || name == src || name == dst) continue;
    auto first = hop(topo, src, name);
    auto second = hop(topo, name, dst);
    if (!first || !second) continue;
    Route r;
    r.action = PlanAction::relay;
    r.relay = name;
    r.loss_db = first->loss_db + second->loss_db;
    for (const Route* h : {&*first, &*second}) {
      r.legs.insert(r.legs.end(), h->legs.begin(), h->legs.end());
      r.switch_pairs.insert(r.switch_pairs.end(), h->switch_pairs.begin(), h->switch_pairs.end());
      r.fibers.insert(r.fibers.end(), h->fibers.begin(), h->fibers.end());
    }
    // Nodes iterate in name order, so strict < keeps the first name on ties.
    if (!best || r.loss_db < best->loss_db) best = std::move(r);
  }
  if (!best) fail(ErrorCode::unroutable, "unroutable: no route from " + src + " to " + dst);
  return *best;
}

std::vector<PlanStep> schedule(std::vector<ConnectionRequest> queue, const NetworkTopology& topo, SwitchState& sw,
                               BusyLinks& busy) {
  std::stable_sort(queue.begin(), queue.end(), [](const ConnectionRequest& x, const ConnectionRequest& y) {
    if (x.priority != y.priority) return x.priority < y.priority;
    if (x.arrival != y.arrival) return x.arrival < y.arrival;
    return x.id < y.id;
  });

  std::set<int> claimed_ports;
  std::set<NodePair> claimed_fibers;
  std::vector<PlanStep> plan;
  plan.reserve(queue.size());
  for (const ConnectionRequest& req : queue) {
    Route route = find_route(topo, req.src, req.dst);
    bool ready = true;
    for (const auto& [a, b] : route.switch_pairs) {
      for (int p : {a, b}) {
        if (sw.status(p) != PortStatus::idle || claimed_ports.contains(p)) ready = false;
      }
    }
    for (const NodePair& f : route.fibers) {
      if (busy.contains(f) || claimed_fibers.contains(f)) ready = false;
    }

    PlanStep step;
    step.request = req;
    step.relay = route.relay;
    step.legs = route.legs;
    step.switch_pairs = route.switch_pairs;
    step.fibers = route.fibers;
    step.loss_db = route.loss_db;
    if (ready) {
      step.action = route.action;
      for (const auto& [a, b] : route.switch_pairs) sw.connect(a, b);
      busy.insert(route.fibers.begin(), route.fibers.end());
    } else {
      step.action = PlanAction::wait;
      for (const auto& [a, b] : route.switch_pairs) {
        // Offline ports are not claimed; they may never come back.
        if (sw.status(a) != PortStatus::offline) claimed_ports.insert(a);
        if (sw.status(b) != PortStatus::offline) claimed_ports.insert(b);
      }
      claimed_fibers.insert(route.fibers.begin(), route.fibers.end());
    }
    plan.push_back(std::move(step));
  }
  return plan;
}

// ---- trusted relay --------------------------------------------------------

RelayMessage relay_publish(KeyPool& relay_ar, KeyPool& relay_rb, std::size_t length) {
  require(relay_ar.owner() == relay_rb.owner(), ErrorCode::invalid_argument,
          "relay pools must both belong to the relay node");
  RelayMessage msg;
  msg.relay = relay_ar.owner();
  msg.a = relay_ar.peer();
  msg.b = relay_rb.peer();
  require(msg.a != msg.b, ErrorCode::invalid_argument, "relay endpoints must differ");

  const auto r1 = relay_ar.reserve(relay_ar.send_lane(), length);
  KeyPool::Reservation r2;
  try {
    r2 = relay_rb.reserve(relay_rb.send_lane(), length);
  } catch (...) {
    relay_ar.cancel(r1);
    throw;
  }
  const auto k1 = relay_ar.take(r1);
  const auto k2 = relay_rb.take(r2);
  msg.offset_ar = r1.offset;
  msg.offset_rb = r2.offset;
  msg.message.resize(length);
  for (std::size_t i = 0; i < length; ++i) msg.message[i] = k1[i] ^ k2[i];
  return msg;
}

std::vector<std::uint8_t> relay_accept_a(KeyPool& a_copy, const RelayMessage& msg) {
  require(a_copy.owner() == msg.a && a_copy.peer() == msg.relay, ErrorCode::invalid_argument,
          "relay_accept_a needs A's copy of the A-relay pool");
  return a_copy.take_at(a_copy.lane_from(msg.relay), msg.offset_ar, msg.message.size());
}

std::vector<std::uint8_t> relay_accept_b(KeyPool& b_copy, const RelayMessage& msg) {
  require(b_copy.owner() == msg.b && b_copy.peer() == msg.relay, ErrorCode::invalid_argument,
          "relay_accept_b needs B's copy of the relay-B pool");
  auto key = b_copy.take_at(b_copy.lane_from(msg.relay), msg.offset_rb, msg.message.size());
  for (std::size_t i = 0; i < key.size(); ++i) key[i] ^= msg.message[i];
  return key;
}

RelayOutcome relay_compose(KeyPool& a_copy, KeyPool& relay_ar, KeyPool& relay_rb, KeyPool& b_copy,
                           std::size_t length) {
  RelayOutcome out;
  out.published = relay_publish(relay_ar, relay_rb, length);
  out.key_a = relay_accept_a(a_copy, out.published);
  out.key_b = relay_accept_b(b_copy, out.published);
  const auto& m = out.published;
  out.ledger = {
      {relay_ar.label(), relay_ar.send_lane(), m.offset_ar, length},
      {a_copy.label(), a_copy.lane_from(m.relay), m.offset_ar, length},
      {relay_rb.label(), relay_rb.send_lane(), m.offset_rb, length},
      {b_copy.label(), b_copy.lane_from(m.relay), m.offset_rb, length},
  };
  return out;
}

}  // namespace qkdnet
