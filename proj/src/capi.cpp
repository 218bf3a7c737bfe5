#include "qkdnet/qkdnet.h"

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <new>
#include <string>
#include <vector>

#include "decoy_analysis.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "keystore.hpp"
#include "netfabric.hpp"
#include "scenario.hpp"
#include "stats_io.hpp"

struct qkdnet_scenario {
  qkdnet::Scenario sc;
  std::vector<std::string> link_names;
};

struct qkdnet_result {
  std::map<int, std::string> sections;
  std::vector<std::pair<std::string, std::string>> attachments;
  bool passed = true;
};

struct qkdnet_switch {
  qkdnet::SwitchState sw;
};

struct qkdnet_pool {
  qkdnet::KeyPool pool;
};

namespace {

thread_local std::string last_error;

template <typename F>
qkdnet_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return QKDNET_OK;
  } catch (const qkdnet::Error& e) {
    last_error = e.what();
    return static_cast<qkdnet_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return QKDNET_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return QKDNET_E_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return QKDNET_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) qkdnet::fail(qkdnet::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

qkdnet::MeasuredStats to_cpp(const qkdnet_stats& s) {
  qkdnet::MeasuredStats m;
  m.mu = s.mu;
  m.nu = s.nu;
  m.q_mu = s.q_mu;
  m.e_mu = s.e_mu;
  m.q_nu = s.q_nu;
  m.e_nu = s.e_nu;
  m.y0 = s.y0;
  m.n_mu = s.n_mu;
  m.n_nu = s.n_nu;
  m.n_0 = s.n_0;
  return m;
}

qkdnet::RateSettings to_cpp(const qkdnet_rate_settings& r) {
  qkdnet::RateSettings s;
  s.f = r.f;
  s.q = r.q;
  s.k_sigma = r.k_sigma;
  return s;
}

void refresh_names(qkdnet_scenario& h) {
  h.link_names.clear();
  for (const auto& l : h.sc.links) h.link_names.push_back(l.name);
}

std::string run_summary(const std::vector<qkdnet::LinkRun>& runs) {
  std::string out;
  for (const auto& r : runs) {
    const auto c = qkdnet::closure_check(r);
    out += fmt::format("{}: {} pulses, E_mu {:.4f}, R {:.1f} bps (model {:.1f}), key {} bytes, max z {:.2f}{}\n",
                       r.spec.name, r.session.pulses, r.session.measured.e_mu, r.simulated_bps, r.expected_bps,
                       r.session.keys.final_key.size(), c.max_z, r.session.keys_match ? "" : ", KEYS DIFFER");
  }
  return out;
}

}  // namespace

extern "C" {

const char* qkdnet_version(void) { return "0.1.0"; }

const char* qkdnet_status_name(qkdnet_status status) {
  if (status == QKDNET_OK) return "ok";
  return qkdnet::error_code_name(static_cast<qkdnet::ErrorCode>(status));
}

const char* qkdnet_last_error(void) { return last_error.c_str(); }

qkdnet_rate_settings qkdnet_default_rate_settings(void) {
  const qkdnet::RateSettings d;
  return {d.f, d.q, d.k_sigma};
}

qkdnet_status qkdnet_key_rate(const qkdnet_stats* stats, const qkdnet_rate_settings* settings, qkdnet_estimate* out) {
  return guarded([&] {
    need(stats, "stats");
    need(out, "out");
    const qkdnet::RateSettings rs = settings ? to_cpp(*settings) : qkdnet::RateSettings{};
    const auto e = qkdnet::key_rate(to_cpp(*stats), rs);
    *out = {e.q_nu_lower, e.y0_lower, e.y0_upper,     e.q1_lower,
            e.e1_upper,   e.rate_per_pulse, e.confidence, e.confidence_tail};
  });
}

double qkdnet_binary_entropy(double x) {
  double out = NAN;
  guarded([&] { out = qkdnet::binary_entropy(x); });
  return out;
}

double qkdnet_confidence_tail(double k_sigma) { return qkdnet::confidence_tail(k_sigma); }

qkdnet_status qkdnet_scenario_load(const char* path, qkdnet_scenario** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto h = std::make_unique<qkdnet_scenario>(qkdnet_scenario{qkdnet::load_scenario(path), {}});
    refresh_names(*h);
    *out = h.release();
  });
}

qkdnet_status qkdnet_scenario_parse(const char* yaml, const char* base_dir, qkdnet_scenario** out) {
  return guarded([&] {
    need(yaml, "yaml");
    need(out, "out");
    *out = nullptr;
    auto h = std::make_unique<qkdnet_scenario>(
        qkdnet_scenario{qkdnet::parse_scenario(yaml, base_dir ? base_dir : "."), {}});
    refresh_names(*h);
    *out = h.release();
  });
}

void qkdnet_scenario_free(qkdnet_scenario* scenario) { delete scenario; }

qkdnet_status qkdnet_scenario_set_seed(qkdnet_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    need(scenario, "scenario");
    scenario->sc.seed = seed;
  });
}

qkdnet_status qkdnet_scenario_set_rate(qkdnet_scenario* scenario, const qkdnet_rate_settings* settings) {
  return guarded([&] {
    need(scenario, "scenario");
    need(settings, "settings");
    const auto rs = to_cpp(*settings);
    rs.validate();
    scenario->sc.rate = rs;
  });
}

size_t qkdnet_scenario_link_count(const qkdnet_scenario* scenario) {
  return scenario ? scenario->link_names.size() : 0;
}

const char* qkdnet_scenario_link_name(const qkdnet_scenario* scenario, size_t index) {
  if (!scenario || index >= scenario->link_names.size()) return nullptr;
  return scenario->link_names[index].c_str();
}

qkdnet_status qkdnet_run_link(const qkdnet_scenario* scenario, const char* link, qkdnet_result** out) {
  return guarded([&] {
    need(scenario, "scenario");
    need(out, "out");
    *out = nullptr;
    std::vector<qkdnet::LinkRun> runs;
    if (link) {
      runs.push_back(qkdnet::run_link(scenario->sc, link));
    } else {
      for (const auto& name : scenario->link_names) runs.push_back(qkdnet::run_link(scenario->sc, name));
    }
    auto r = std::make_unique<qkdnet_result>();
    r->sections[QKDNET_SECTION_TABLE] = qkdnet::format_link_runs(runs);
    r->sections[QKDNET_SECTION_SUMMARY] = run_summary(runs);
    for (const auto& run : runs) {
      r->attachments.emplace_back(run.spec.name + ".transcript.jsonl", run.session.transcript.to_jsonl());
      r->passed = r->passed && run.session.keys_match;
    }
    *out = r.release();
  });
}

qkdnet_status qkdnet_run_network(const qkdnet_scenario* scenario, qkdnet_result** out) {
  return guarded([&] {
    need(scenario, "scenario");
    need(out, "out");
    *out = nullptr;
    const qkdnet::NetworkResult net = qkdnet::run_network(scenario->sc);
    auto r = std::make_unique<qkdnet_result>();
    r->sections[QKDNET_SECTION_EVENTS] = net.event_log();
    r->sections[QKDNET_SECTION_BUDGETS] = net.format_budgets();
    r->sections[QKDNET_SECTION_MESSAGES] = net.format_messages();
    std::size_t delivered = 0;
    std::size_t refused = 0;
    for (const auto& m : net.messages) {
      delivered += m.delivered;
      refused += m.replay_refused;
    }
    std::string summary = fmt::format(
        "sessions {}\nmessages {}/{} delivered\nreplays refused {}/{}\nkey exhaustion events {}\naudit violations {}\n",
        net.sessions, delivered, net.messages.size(), refused, delivered, net.exhausted, net.audit_violations.size());
    for (const auto& v : net.audit_violations) summary += "audit: " + v + "\n";
    for (const auto& f : net.failures) summary += "failed: " + f + "\n";
    summary += net.passed() ? "PASS\n" : "FAIL\n";
    r->sections[QKDNET_SECTION_SUMMARY] = std::move(summary);
    r->passed = net.passed();
    *out = r.release();
  });
}

qkdnet_status qkdnet_analyze_file(const char* stats_path, const qkdnet_scenario* scenario,
                                  const qkdnet_rate_settings* rate_override, qkdnet_result** out) {
  return guarded([&] {
    need(stats_path, "stats_path");
    need(out, "out");
    *out = nullptr;
    qkdnet::StatsDefaults defaults;
    qkdnet::RateSettings rate;
    if (scenario) {
      defaults.intensity = scenario->sc.intensity;
      defaults.run_seconds = scenario->sc.run_seconds;
      rate = scenario->sc.rate;
    }
    if (rate_override) {
      rate = to_cpp(*rate_override);
      rate.validate();
    }
    const auto rows = qkdnet::analyze_records(qkdnet::load_stats(stats_path, defaults), rate, defaults.intensity);
    auto r = std::make_unique<qkdnet_result>();
    r->sections[QKDNET_SECTION_TABLE] = qkdnet::format_analysis(rows);
    std::size_t flagged = 0;
    for (const auto& row : rows) flagged += !row.flag.empty();
    r->sections[QKDNET_SECTION_SUMMARY] = fmt::format("{} records, {} flagged\n", rows.size(), flagged);
    r->passed = flagged == 0;
    *out = r.release();
  });
}

qkdnet_status qkdnet_calibrate(const qkdnet_scenario* scenario, qkdnet_result** out) {
  return guarded([&] {
    need(scenario, "scenario");
    need(out, "out");
    *out = nullptr;
    auto r = std::make_unique<qkdnet_result>();
    r->sections[QKDNET_SECTION_TABLE] = qkdnet::format_calibration(qkdnet::calibration_table(scenario->sc));
    *out = r.release();
  });
}

qkdnet_status qkdnet_report(const qkdnet_scenario* scenario, int simulate, qkdnet_result** out) {
  if (simulate) return qkdnet_run_link(scenario, nullptr, out);
  return guarded([&] {
    need(scenario, "scenario");
    need(out, "out");
    *out = nullptr;
    auto r = std::make_unique<qkdnet_result>();
    r->sections[QKDNET_SECTION_TABLE] = qkdnet::format_expected_report(scenario->sc);
    *out = r.release();
  });
}

const char* qkdnet_result_text(const qkdnet_result* result, qkdnet_section section) {
  if (!result) return "";
  auto it = result->sections.find(static_cast<int>(section));
  return it == result->sections.end() ? "" : it->second.c_str();
}

int qkdnet_result_passed(const qkdnet_result* result) { return result && result->passed ? 1 : 0; }

size_t qkdnet_result_attachment_count(const qkdnet_result* result) {
  return result ? result->attachments.size() : 0;
}

const char* qkdnet_result_attachment_name(const qkdnet_result* result, size_t index) {
  if (!result || index >= result->attachments.size()) return nullptr;
  return result->attachments[index].first.c_str();
}

const char* qkdnet_result_attachment_text(const qkdnet_result* result, size_t index) {
  if (!result || index >= result->attachments.size()) return nullptr;
  return result->attachments[index].second.c_str();
}

void qkdnet_result_free(qkdnet_result* result) { delete result; }

qkdnet_status qkdnet_switch_new(int ports, qkdnet_switch** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new qkdnet_switch{qkdnet::SwitchState(ports)};
  });
}

void qkdnet_switch_free(qkdnet_switch* sw) { delete sw; }

qkdnet_status qkdnet_switch_connect(qkdnet_switch* sw, int a, int b) {
  return guarded([&] {
    need(sw, "switch");
    sw->sw.connect(a, b);
  });
}

qkdnet_status qkdnet_switch_disconnect(qkdnet_switch* sw, int port) {
  return guarded([&] {
    need(sw, "switch");
    sw->sw.disconnect(port);
  });
}

qkdnet_status qkdnet_switch_set_offline(qkdnet_switch* sw, int port, int offline) {
  return guarded([&] {
    need(sw, "switch");
    sw->sw.set_offline(port, offline != 0);
  });
}

qkdnet_status qkdnet_switch_status(const qkdnet_switch* sw, int port, qkdnet_port_status* out) {
  return guarded([&] {
    need(sw, "switch");
    need(out, "out");
    *out = static_cast<qkdnet_port_status>(sw->sw.status(port));
  });
}

qkdnet_status qkdnet_switch_peer(const qkdnet_switch* sw, int port, int* out) {
  return guarded([&] {
    need(sw, "switch");
    need(out, "out");
    *out = sw->sw.peer(port).value_or(0);
  });
}

qkdnet_status qkdnet_pool_new(const char* owner, const char* peer, qkdnet_pool** out) {
  return guarded([&] {
    need(owner, "owner");
    need(peer, "peer");
    need(out, "out");
    *out = nullptr;
    *out = new qkdnet_pool{qkdnet::KeyPool(owner, peer)};
  });
}

qkdnet_status qkdnet_pool_load(const char* path, qkdnet_pool** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new qkdnet_pool{qkdnet::KeyPool::load(path)};
  });
}

qkdnet_status qkdnet_pool_save(const qkdnet_pool* pool, const char* path) {
  return guarded([&] {
    need(pool, "pool");
    need(path, "path");
    pool->pool.save(path);
  });
}

void qkdnet_pool_free(qkdnet_pool* pool) { delete pool; }

qkdnet_status qkdnet_pool_deposit(qkdnet_pool* pool, const uint8_t* key, size_t length, const char* provenance) {
  return guarded([&] {
    need(pool, "pool");
    need(key, "key");
    pool->pool.deposit({key, length}, provenance ? provenance : "");
  });
}

size_t qkdnet_pool_total(const qkdnet_pool* pool) { return pool ? pool->pool.total_bytes() : 0; }

size_t qkdnet_pool_send_available(const qkdnet_pool* pool) {
  return pool ? pool->pool.available(pool->pool.send_lane()) : 0;
}

size_t qkdnet_pool_consumed(const qkdnet_pool* pool) { return pool ? pool->pool.consumed() : 0; }

qkdnet_status qkdnet_otp_encrypt(qkdnet_pool* sender, const uint8_t* plaintext, size_t length, uint8_t* cipher_out,
                                 uint64_t* offset_out) {
  return guarded([&] {
    need(sender, "sender");
    if (length > 0) {
      need(plaintext, "plaintext");
      need(cipher_out, "cipher_out");
    }
    const auto msg = qkdnet::otp_encrypt(sender->pool, {plaintext, length});
    std::copy(msg.ciphertext.begin(), msg.ciphertext.end(), cipher_out);
    if (offset_out) *offset_out = msg.offset;
  });
}

qkdnet_status qkdnet_otp_decrypt(qkdnet_pool* receiver, const char* sender, uint64_t offset,
                                 const uint8_t* ciphertext, size_t length, uint8_t* plain_out) {
  return guarded([&] {
    need(receiver, "receiver");
    need(sender, "sender");
    if (length > 0) {
      need(ciphertext, "ciphertext");
      need(plain_out, "plain_out");
    }
    qkdnet::OtpMessage msg{receiver->pool.pair(), sender, offset, {ciphertext, ciphertext + length}};
    const auto plain = qkdnet::otp_decrypt(receiver->pool, msg);
    std::copy(plain.begin(), plain.end(), plain_out);
  });
}

}  // extern "C"
