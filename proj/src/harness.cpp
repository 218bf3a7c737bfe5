#include "harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>

#include "error.hpp"
#include "netfabric.hpp"

namespace qkdnet {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string opt_num(const std::optional<double>& v, const char* spec = "{:.0f}") {
  return v ? fmt::format(fmt::runtime(spec), *v) : std::string("-");
}

}  // namespace

// ---- analyze --------------------------------------------------------------

double sifted_rate_bps(const MeasuredStats& stats, double clock_hz, double duty_cycle,
                       const IntensitySettings& intensity) {
  return clock_hz * duty_cycle * intensity.fraction(PulseClass::signal) * stats.q_mu * 0.5;
}

std::vector<AnalysisRow> analyze_records(const std::vector<StatsRecord>& records, const RateSettings& rate,
                                         const IntensitySettings& intensity) {
  std::vector<AnalysisRow> rows;
  rows.reserve(records.size());
  for (const StatsRecord& rec : records) {
    AnalysisRow row;
    row.record = rec;
    row.flag = rec.error;
    if (row.flag.empty()) {
      try {
        row.estimate = key_rate(rec.stats, rate);
        row.final_bps = rate_bps(row.estimate, rec.clock_hz, rec.duty_cycle);
        row.sifted_bps = sifted_rate_bps(rec.stats, rec.clock_hz, rec.duty_cycle, intensity);
      } catch (const Error& e) {
        row.flag = e.what();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_analysis(const std::vector<AnalysisRow>& rows) {
  std::string out =
      "link\tline\tQ_mu\tE_mu\tQ_nu\tE_nu\tY_0\tN_nu\tQ_nu_L\tY0_U\tQ1_L\te1_U\tR_per_pulse\tsifted_bps\t"
      "final_bps\tactive_bps\tref_sifted_bps\tref_final_bps\tstatus\n";
  for (const auto& r : rows) {
    const MeasuredStats& s = r.record.stats;
    out += fmt::format("{}\t{}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.4e}\t", r.record.link, r.record.line, s.q_mu,
                       s.e_mu, s.q_nu, s.e_nu, s.y0, s.n_nu);
    if (r.flag.empty()) {
      const DecoyEstimate& e = r.estimate;
      out += fmt::format("{:.4e}\t{:.4e}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.1f}\t{:.1f}\t{:.1f}\t", e.q_nu_lower,
                         e.y0_upper, e.q1_lower, e.e1_upper, e.rate_per_pulse, r.sifted_bps, r.final_bps,
                         e.rate_per_pulse * r.record.clock_hz);
    } else {
      out += "-\t-\t-\t-\t-\t-\t-\t-\t";
    }
    out += fmt::format("{}\t{}\t{}\n", opt_num(r.record.ref_sifted_bps), opt_num(r.record.ref_final_bps),
                       r.flag.empty() ? std::string("ok") : "FLAGGED: " + r.flag);
  }
  return out;
}

// ---- calibrate ------------------------------------------------------------

std::vector<CalibrationRow> calibration_table(const Scenario& sc) {
  std::vector<CalibrationRow> rows;
  for (const LinkSpec& spec : sc.links) {
    if (!spec.reference) continue;
    CalibrationRow row;
    row.link = spec.name;
    row.params = spec.params;
    row.reference = spec.reference->stats;
    PulseBudget counts{0.0, spec.reference->stats.n_mu, spec.reference->stats.n_nu, spec.reference->stats.n_0};
    counts.total = counts.signal + counts.decoy + counts.vacuum;
    row.predicted = expected_stats(spec.params, sc.intensity, counts);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_calibration(const std::vector<CalibrationRow>& rows) {
  std::string out =
      "link\tfiber_loss_db\tinsertion_loss_db\teta\tdark_count_prob\tmisalignment\tQ_nu_ref\tQ_nu_model\t"
      "E_nu_ref\tE_nu_model\n";
  for (const auto& r : rows) {
    out += fmt::format("{}\t{:.3f}\t{:.4f}\t{:.6e}\t{:.6e}\t{:.6f}\t{:.4e}\t{:.4e}\t{:.4f}\t{:.4f}\n", r.link,
                       r.params.fiber_loss_db, r.params.insertion_loss_db, transmittance(r.params),
                       r.params.dark_count_prob, r.params.misalignment, r.reference.q_nu, r.predicted.q_nu,
                       r.reference.e_nu, r.predicted.e_nu);
  }
  return out;
}

// ---- run-link -------------------------------------------------------------

SessionConfig session_config(const Scenario& sc, const LinkSpec& spec, double seconds, std::uint64_t pulse_cap) {
  SessionConfig cfg;
  cfg.intensity = sc.intensity;
  cfg.rate = sc.rate;
  cfg.test_fraction = sc.test_fraction;
  cfg.safety_bits = sc.safety_bits;
  const double wanted = std::floor(seconds * spec.params.clock_hz * spec.params.duty_cycle);
  cfg.pulses = static_cast<std::uint64_t>(std::min(static_cast<double>(pulse_cap), wanted));
  cfg.analysis_budget = pulse_budget(seconds, spec.params.clock_hz, spec.params.duty_cycle, sc.intensity);
  return cfg;
}

std::uint64_t link_seed(std::uint64_t scenario_seed, const std::string& link) {
  return Rng(scenario_seed, fnv1a(link)).next();
}

LinkRun run_link(const Scenario& sc, const std::string& link, std::optional<std::uint64_t> seed,
                 std::uint64_t pulse_cap) {
  LinkRun run;
  run.spec = sc.link(link);
  const LinkParams& lp = run.spec.params;
  run.budget = pulse_budget(sc.run_seconds, lp.clock_hz, lp.duty_cycle, sc.intensity);
  run.expected = expected_stats(lp, sc.intensity, run.budget);
  run.expected_estimate = key_rate(run.expected, sc.rate);
  run.expected_bps = rate_bps(run.expected_estimate, lp.clock_hz, lp.duty_cycle);

  const SessionConfig cfg = session_config(sc, run.spec, sc.run_seconds, pulse_cap ? pulse_cap : run.spec.pulse_cap);
  run.session = run_session(lp, cfg, seed.value_or(link_seed(sc.seed, link)));
  run.simulated_bps = rate_bps(run.session.estimate, lp.clock_hz, lp.duty_cycle);
  return run;
}

ClosureCheck closure_check(const LinkRun& run) {
  ClosureCheck c;
  const MeasuredStats& m = run.session.measured;
  const MeasuredStats& e = run.expected;
  auto z = [](double measured, double expected, double n) {
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    return se > 0.0 ? std::abs(measured - expected) / se : (measured == expected ? 0.0 : INFINITY);
  };
  const auto& est = run.session.estimation;
  c.z["Q_mu"] = z(m.q_mu, e.q_mu, m.n_mu);
  c.z["Q_nu"] = z(m.q_nu, e.q_nu, m.n_nu);
  c.z["Y_0"] = z(m.y0, e.y0, m.n_0);
  c.z["E_mu"] = z(m.e_mu, e.e_mu, static_cast<double>(est.signal_sample_bits + run.session.keys.corrected.size()));
  c.z["E_nu"] = z(m.e_nu, e.e_nu, static_cast<double>(std::max<std::uint64_t>(est.decoy_sample_bits, 1)));
  for (const auto& [name, value] : c.z) c.max_z = std::max(c.max_z, value);
  const double target = run.expected_estimate.rate_per_pulse;
  c.rate_deviation = target > 0.0 ? run.session.estimate.rate_per_pulse / target - 1.0 : INFINITY;
  return c;
}

std::string format_link_runs(const std::vector<LinkRun>& runs) {
  std::string out =
      "link\tpulses\tclicks\tsifted_bits\tQ_mu\tE_mu\tQ_nu\tE_nu\tY_0\tQ1_L\te1_U\tR_per_pulse\tsim_bps\t"
      "model_bps\tref_final_bps\tleakage_bits\tf_realized\tkey_bytes\tkeys_match\tmax_z\tnote\n";
  for (const auto& r : runs) {
    const SessionResult& s = r.session;
    const MeasuredStats& m = s.measured;
    const ClosureCheck c = closure_check(r);
    const std::optional<double> ref =
        r.spec.reference ? r.spec.reference->ref_final_bps : std::optional<double>{};
    out += fmt::format(
        "{}\t{}\t{}\t{}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.1f}\t{:.1f}\t{}\t{}\t{:.3f}\t{}"
        "\t{}\t{:.2f}\t{}\n",
        r.spec.name, s.pulses, s.clicks, s.sifted_signal_bits, m.q_mu, m.e_mu, m.q_nu, m.e_nu, m.y0,
        s.estimate.q1_lower, s.estimate.e1_upper, s.estimate.rate_per_pulse, r.simulated_bps, r.expected_bps,
        opt_num(ref), s.keys.leakage_bits, s.realized_f, s.keys.final_key.size(), s.keys_match ? "yes" : "no",
        c.max_z, s.note.empty() ? std::string("-") : s.note);
  }
  return out;
}

// ---- report ---------------------------------------------------------------

std::string format_expected_report(const Scenario& sc) {
  std::string out =
      "link\tfiber_loss_db\tinsertion_loss_db\tclock_hz\tQ_mu\tE_mu\tQ_nu\tE_nu\tY_0\tQ1_L\te1_U\tsifted_bps\t"
      "final_bps\tactive_bps\tref_sifted_bps\tref_final_bps\n";
  for (const LinkSpec& spec : sc.links) {
    const LinkParams& lp = spec.params;
    const PulseBudget budget = pulse_budget(sc.run_seconds, lp.clock_hz, lp.duty_cycle, sc.intensity);
    const MeasuredStats s = expected_stats(lp, sc.intensity, budget);
    const DecoyEstimate e = key_rate(s, sc.rate);
    std::optional<double> ref_sifted;
    std::optional<double> ref_final;
    if (spec.reference) {
      ref_sifted = spec.reference->ref_sifted_bps;
      ref_final = spec.reference->ref_final_bps;
    }
    out += fmt::format("{}\t{:.3f}\t{:.4f}\t{:.3e}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.4f}\t{:.4e}\t{:.4e}\t{:.4f}\t{:.1f}\t{:.1f}"
                       "\t{:.1f}\t{}\t{}\n",
                       spec.name, lp.fiber_loss_db, lp.insertion_loss_db, lp.clock_hz, s.q_mu, s.e_mu, s.q_nu, s.e_nu,
                       s.y0, e.q1_lower, e.e1_upper, sifted_rate_bps(s, lp.clock_hz, lp.duty_cycle, sc.intensity),
                       rate_bps(e, lp.clock_hz, lp.duty_cycle), e.rate_per_pulse * lp.clock_hz, opt_num(ref_sifted),
                       opt_num(ref_final));
  }
  return out;
}

// ---- run-network ----------------------------------------------------------

namespace {

enum class EventKind : int { session_done = 0, request = 1, message = 2 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::request;
  std::uint64_t seq = 0;
  std::size_t index = 0;
  std::size_t sub = 0;

  bool operator>(const Event& o) const {
    return std::tie(time, kind, seq) > std::tie(o.time, o.kind, o.seq);
  }
};

struct ActiveConnection {
  PlanStep step;
  struct Leg {
    const LinkSpec* spec = nullptr;
    SessionResult result;
  };
  std::vector<Leg> legs;
};

class NetworkRun {
 public:
  explicit NetworkRun(const Scenario& sc) : sc_(sc), sw_(sc.switch_ports) {}

  NetworkResult run() {
    for (std::size_t i = 0; i < sc_.requests.size(); ++i) push(sc_.requests[i].arrival, EventKind::request, i);
    for (std::size_t i = 0; i < sc_.traffic.size(); ++i) {
      const TrafficSpec& t = sc_.traffic[i];
      for (std::size_t k = 0; k < t.count; ++k) push(t.at + static_cast<double>(k) * t.interval, EventKind::message, i, k);
    }
    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      now_ = ev.time;
      switch (ev.kind) {
        case EventKind::request: on_request(ev.index); break;
        case EventKind::session_done: on_session_done(ev.index); break;
        case EventKind::message: on_message(ev.index, ev.sub); break;
      }
    }
    for (const auto& req : pending_) {
      fail_assert(fmt::format("request #{} {}->{} never scheduled", req.id, req.src, req.dst));
    }
    finish();
    return std::move(out_);
  }

 private:
  void push(double t, EventKind kind, std::size_t index, std::size_t sub = 0) {
    events_.push({t, kind, seq_++, index, sub});
  }

  void log(const std::string& kind, const std::string& detail) {
    out_.events.push_back(fmt::format("{:.3f}\t{}\t{}", now_, kind, detail));
  }

  void fail_assert(const std::string& what) {
    out_.failures.push_back(what);
    log("assert-fail", what);
  }

  KeyPool& pool(const std::string& owner, const std::string& peer) {
    KeyPool probe(owner, peer);
    const std::string key = probe.label();
    auto it = out_.pools.find(key);
    if (it == out_.pools.end()) it = out_.pools.emplace(key, std::move(probe)).first;
    return it->second;
  }

  void on_request(std::size_t i) {
    const ConnectionRequest& req = sc_.requests[i];
    log("request", fmt::format("#{} {}->{} priority={}", req.id, req.src, req.dst, req.priority));
    pending_.push_back(req);
    dispatch();
  }

  void dispatch() {
    if (pending_.empty()) return;
    std::vector<PlanStep> plan;
    try {
      plan = schedule(pending_, sc_.topology, sw_, busy_);
    } catch (const Error& e) {
      // A request with no route can never be served; drop it and carry on.
      fail_assert(e.what());
      pending_.erase(std::remove_if(pending_.begin(), pending_.end(),
                                    [&](const ConnectionRequest& r) {
                                      try {
                                        find_route(sc_.topology, r.src, r.dst);
                                        return false;
                                      } catch (const Error&) {
                                        return true;
                                      }
                                    }),
                     pending_.end());
      return dispatch();
    }
    pending_.clear();
    for (PlanStep& step : plan) {
      if (step.action == PlanAction::wait) {
        if (announced_wait_.insert(step.request.id).second) log("schedule", fmt::format("#{} wait", step.request.id));
        pending_.push_back(step.request);
        continue;
      }
      std::string detail = fmt::format("#{} {}", step.request.id, to_string(step.action));
      if (!step.relay.empty()) detail += " via=" + step.relay;
      for (const auto& [a, b] : step.switch_pairs) detail += fmt::format(" ports={}-{}", a, b);
      for (const auto& f : step.fibers) detail += " fiber=" + f.label();
      detail += fmt::format(" loss_db={:.2f}", step.loss_db);
      log("schedule", detail);
      start(std::move(step));
    }
  }

  void start(PlanStep step) {
    const double begin = now_ + (step.switch_pairs.empty() ? 0.0 : sc_.reconfigure_seconds);
    ActiveConnection conn;
    conn.step = step;
    std::vector<std::pair<std::string, std::string>> hops;
    if (step.relay.empty()) {
      hops.emplace_back(step.request.src, step.request.dst);
    } else {
      hops.emplace_back(step.request.src, step.relay);
      hops.emplace_back(step.relay, step.request.dst);
    }
    for (std::size_t leg = 0; leg < hops.size(); ++leg) {
      const LinkSpec& spec = sc_.link_between(hops[leg].first, hops[leg].second);
      const SessionConfig cfg = session_config(sc_, spec, sc_.session_seconds, spec.pulse_cap);
      const std::uint64_t seed = Rng(sc_.seed, (step.request.id << 4) | leg).next();
      ActiveConnection::Leg l;
      l.spec = &spec;
      l.result = run_session(spec.params, cfg, seed);
      conn.legs.push_back(std::move(l));
      ++out_.sessions;
    }
    active_.push_back(std::move(conn));
    const std::size_t id = active_.size() - 1;
    push(begin + sc_.session_seconds, EventKind::session_done, id);
  }

  void on_session_done(std::size_t id) {
    ActiveConnection& conn = active_[id];
    for (const auto& [a, b] : conn.step.switch_pairs) sw_.disconnect(a);
    for (const auto& f : conn.step.fibers) busy_.erase(f);
    for (auto& leg : conn.legs) {
      const LinkSpec& spec = *leg.spec;
      const SessionResult& r = leg.result;
      const NodePair pair = NodePair::of(spec.from, spec.to);
      log("session", fmt::format("#{} {} pulses={} sifted_bits={} E_mu={:.4f} key_bytes={}{}", conn.step.request.id,
                                 spec.name, r.pulses, r.sifted_signal_bits, r.measured.e_mu, r.keys.final_key.size(),
                                 r.note.empty() ? "" : " note=" + r.note));
      if (!r.keys_match) {
        fail_assert(fmt::format("#{} {}: endpoint keys differ after privacy amplification", conn.step.request.id,
                                spec.name));
        continue;
      }
      ++sessions_per_pair_[pair];
      if (r.keys.final_key.empty()) continue;
      const std::string provenance = fmt::format("{}#{}", spec.name, conn.step.request.id);
      pool(spec.from, spec.to).deposit(r.keys.final_key, provenance);
      pool(spec.to, spec.from).deposit(r.receiver_final_key, provenance);
    }
    dispatch();
  }

  void audit(const std::string& pool_label, Lane lane, std::uint64_t offset, std::size_t length) {
    if (length == 0) return;
    auto& ranges = used_[{pool_label, static_cast<int>(lane)}];
    const std::uint64_t end = offset + length;
    auto it = ranges.lower_bound(offset);
    const bool clash_next = it != ranges.end() && it->first < end;
    const bool clash_prev = it != ranges.begin() && std::prev(it)->second > offset;
    if (clash_next || clash_prev) {
      out_.audit_violations.push_back(
          fmt::format("{} lane {} bytes [{}, {}) used twice", pool_label, static_cast<int>(lane), offset, end));
    }
    ranges[offset] = std::max(ranges[offset], end);
  }

  void on_message(std::size_t index, std::size_t k) {
    const TrafficSpec& t = sc_.traffic[index];
    MessageOutcome m;
    m.traffic = index;
    m.sequence = k;
    m.time = now_;
    m.src = t.src;
    m.dst = t.dst;
    m.bytes = t.bytes;
    const auto plaintext = Rng(sc_.seed, 0x7000000000000000ull | (index << 20) | k).bytes(t.bytes);
    try {
      const Route route = find_route(sc_.topology, t.src, t.dst);
      m.route = route.relay.empty() ? "direct" : "relay:" + route.relay;
      if (route.relay.empty()) {
        send_direct(m, plaintext);
      } else {
        send_relayed(m, route.relay, plaintext);
      }
    } catch (const KeyExhausted& e) {
      ++out_.exhausted;
      m.error = e.what();
    } catch (const Error& e) {
      m.error = e.what();
    }
    log("message", fmt::format("{}->{} bytes={} route={} delivered={} replay_refused={}{}", m.src, m.dst, m.bytes,
                               m.route.empty() ? "-" : m.route, m.delivered ? "yes" : "no",
                               m.replay_refused ? "yes" : "no", m.error.empty() ? "" : " error=" + m.error));
    if (!m.delivered) {
      fail_assert(fmt::format("message {}->{} #{}.{} did not round-trip", m.src, m.dst, index, k));
    } else if (!m.replay_refused) {
      fail_assert(fmt::format("replay of message {}->{} #{}.{} was accepted", m.src, m.dst, index, k));
    }
    out_.messages.push_back(std::move(m));
  }

  void send_direct(MessageOutcome& m, const std::vector<std::uint8_t>& plaintext) {
    KeyPool& tx = pool(m.src, m.dst);
    KeyPool& rx = pool(m.dst, m.src);
    const OtpMessage msg = otp_encrypt(tx, plaintext);
    audit(tx.label(), tx.send_lane(), msg.offset, plaintext.size());
    const auto decrypted = otp_decrypt(rx, msg);
    audit(rx.label(), rx.lane_from(m.src), msg.offset, plaintext.size());
    m.delivered = decrypted == plaintext;
    try {
      otp_decrypt(rx, msg);
    } catch (const Error& e) {
      m.replay_refused = e.code() == ErrorCode::key_reuse_refused;
    }
  }

  void send_relayed(MessageOutcome& m, const std::string& relay, const std::vector<std::uint8_t>& plaintext) {
    KeyPool& a = pool(m.src, relay);
    KeyPool& ra = pool(relay, m.src);
    KeyPool& rb = pool(relay, m.dst);
    KeyPool& b = pool(m.dst, relay);
    const RelayOutcome o = relay_compose(a, ra, rb, b, plaintext.size());
    for (const ConsumptionEntry& e : o.ledger) audit(e.pool, e.lane, e.offset, e.length);
    std::vector<std::uint8_t> cipher(plaintext.size());
    for (std::size_t i = 0; i < cipher.size(); ++i) cipher[i] = plaintext[i] ^ o.key_a[i];
    std::vector<std::uint8_t> decrypted(cipher.size());
    for (std::size_t i = 0; i < cipher.size(); ++i) decrypted[i] = cipher[i] ^ o.key_b[i];
    m.delivered = decrypted == plaintext;
    try {
      relay_accept_b(b, o.published);
    } catch (const Error& e) {
      m.replay_refused = e.code() == ErrorCode::key_reuse_refused;
    }
  }

  void finish() {
    // Consumed bytes must have been wiped on every copy.
    for (const auto& [key, ranges] : used_) {
      const KeyPool& p = out_.pools.at(key.first);
      for (const auto& [offset, end] : ranges) {
        for (std::uint64_t i = offset; i < end; ++i) {
          if (p.byte_at(KeyPool::position_of(static_cast<Lane>(key.second), i)) != 0) {
            out_.audit_violations.push_back(fmt::format("{} lane {} byte {} not zeroized", key.first, key.second, i));
            break;
          }
        }
      }
    }
    std::set<NodePair> pairs;
    for (const auto& [label, p] : out_.pools) pairs.insert(p.pair());
    for (const NodePair& pair : pairs) {
      PairBudget b;
      b.pair = pair;
      b.sessions = sessions_per_pair_[pair];
      const KeyPool& x = pool(pair.first, pair.second);
      const KeyPool& y = pool(pair.second, pair.first);
      b.produced = x.total_bytes();
      b.consumed_forward = x.consumed(Lane::forward);
      b.consumed_backward = x.consumed(Lane::backward);
      b.available = x.available();
      b.copies_agree = x.total_bytes() == y.total_bytes() && x.consumed(Lane::forward) == y.consumed(Lane::forward) &&
                       x.consumed(Lane::backward) == y.consumed(Lane::backward);
      if (!b.copies_agree) fail_assert("pool copies of " + pair.label() + " disagree");
      if (b.consumed_forward + b.consumed_backward > b.produced) {
        fail_assert("pair " + pair.label() + " consumed more key than it produced");
      }
      out_.budgets.push_back(b);
    }
  }

  const Scenario& sc_;
  SwitchState sw_;
  BusyLinks busy_;
  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
  std::vector<ConnectionRequest> pending_;
  std::set<std::uint64_t> announced_wait_;
  std::vector<ActiveConnection> active_;
  std::map<NodePair, std::size_t> sessions_per_pair_;
  std::map<std::pair<std::string, int>, std::map<std::uint64_t, std::uint64_t>> used_;
  NetworkResult out_;
};

}  // namespace

NetworkResult run_network(const Scenario& sc) { return NetworkRun(sc).run(); }

std::string NetworkResult::event_log() const {
  std::string out;
  for (const auto& e : events) {
    out += e;
    out += '\n';
  }
  return out;
}

std::string NetworkResult::format_budgets() const {
  std::string out = "pair\tsessions\tproduced_bytes\tconsumed_fwd\tconsumed_bwd\tavailable\tcopies_agree\n";
  for (const auto& b : budgets) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", b.pair.label(), b.sessions, b.produced, b.consumed_forward,
                       b.consumed_backward, b.available, b.copies_agree ? "yes" : "no");
  }
  return out;
}

std::string NetworkResult::format_messages() const {
  std::string out = "time\tsrc\tdst\tbytes\troute\tdelivered\treplay_refused\terror\n";
  for (const auto& m : messages) {
    out += fmt::format("{:.3f}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", m.time, m.src, m.dst, m.bytes,
                       m.route.empty() ? "-" : m.route, m.delivered ? "yes" : "no", m.replay_refused ? "yes" : "no",
                       m.error.empty() ? "-" : m.error);
  }
  return out;
}

}  // namespace qkdnet
