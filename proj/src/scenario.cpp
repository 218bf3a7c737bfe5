#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"

namespace qkdnet {

namespace {

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(const YAML::Node& at, const std::string& what) const {
    const auto mark = at.Mark();
    const std::string where = mark.is_null() ? source_ : source_ + ":" + std::to_string(mark.line + 1);
    fail(ErrorCode::parse, where + ": " + what);
  }

  void allow(const YAML::Node& map, std::initializer_list<const char*> keys, const std::string& what) const {
    if (!map.IsMap()) error(map, what + " must be a mapping");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.contains(key)) error(kv.first, "unknown key '" + key + "' in " + what);
    }
  }

  double number(const YAML::Node& n, const std::string& what) const {
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) error(n, what + " must be finite");
      return v;
    } catch (const YAML::Exception&) {
      error(n, what + " must be a number");
    }
  }

  double number(const YAML::Node& map, const char* key, double fallback) const {
    const YAML::Node n = map[key];
    return n ? number(n, key) : fallback;
  }

  std::uint64_t count(const YAML::Node& n, const std::string& what) const {
    const double v = number(n, what);
    if (v < 0.0 || v != std::floor(v) || v > 9.0e18) error(n, what + " must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }

  std::uint64_t count(const YAML::Node& map, const char* key, std::uint64_t fallback) const {
    const YAML::Node n = map[key];
    return n ? count(n, key) : fallback;
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n || !n.IsScalar()) error(n, what + " must be a string");
    return n.as<std::string>();
  }

  bool flag(const YAML::Node& map, const char* key, bool fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      error(n, std::string(key) + " must be true or false");
    }
  }

 private:
  std::string source_;
};

struct AccessFiber {
  double loss_db = 0.0;
  double km = 0.0;
};

}  // namespace

const LinkSpec& Scenario::link(const std::string& name) const {
  for (const auto& l : links) {
    if (l.name == name) return l;
  }
  fail(ErrorCode::not_found, "scenario has no link named " + name);
}

const LinkSpec& Scenario::link_between(const std::string& a, const std::string& b) const {
  for (const auto& l : links) {
    if (l.from == a && l.to == b) return l;
  }
  for (const auto& l : links) {
    if (l.from == b && l.to == a) return l;
  }
  fail(ErrorCode::not_found, "scenario has no link between " + a + " and " + b);
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir, const std::string& source) {
  Parser p(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(ErrorCode::parse, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) fail(ErrorCode::parse, source + ": scenario must be a mapping");
  p.allow(root,
          {"seed", "run_seconds", "pulse_cap", "intensity", "rate", "test_fraction", "safety_bits", "switch",
           "calibration_stats", "link_defaults", "nodes", "links", "network", "requests", "traffic"},
          "scenario");

  Scenario sc;
  sc.source = source;
  if (!root["seed"]) fail(ErrorCode::parse, source + ": seed is mandatory");
  sc.seed = p.count(root["seed"], "seed");
  sc.run_seconds = p.number(root, "run_seconds", sc.run_seconds);
  sc.pulse_cap = p.count(root, "pulse_cap", sc.pulse_cap);
  sc.test_fraction = p.number(root, "test_fraction", sc.test_fraction);
  sc.safety_bits = p.count(root, "safety_bits", sc.safety_bits);
  if (sc.run_seconds <= 0.0 || sc.pulse_cap == 0) fail(ErrorCode::parse, source + ": run_seconds and pulse_cap must be positive");
  if (!(sc.test_fraction > 0.0 && sc.test_fraction < 1.0)) fail(ErrorCode::parse, source + ": test_fraction must lie in (0, 1)");

  if (const auto n = root["intensity"]) {
    p.allow(n, {"mu", "nu", "occupancy"}, "intensity");
    sc.intensity.mu = p.number(n, "mu", sc.intensity.mu);
    sc.intensity.nu = p.number(n, "nu", sc.intensity.nu);
    if (const auto occ = n["occupancy"]) {
      if (!occ.IsSequence() || occ.size() != 3) p.error(occ, "occupancy must list three weights");
      for (std::size_t i = 0; i < 3; ++i) sc.intensity.occupancy[i] = static_cast<std::uint32_t>(p.count(occ[i], "occupancy"));
    }
  }
  if (const auto n = root["rate"]) {
    p.allow(n, {"f", "q", "k_sigma"}, "rate");
    sc.rate.f = p.number(n, "f", sc.rate.f);
    sc.rate.q = p.number(n, "q", sc.rate.q);
    sc.rate.k_sigma = p.number(n, "k_sigma", sc.rate.k_sigma);
  }
  try {
    sc.intensity.validate();
    sc.rate.validate();
  } catch (const Error& e) {
    fail(ErrorCode::parse, source + ": " + e.what());
  }

  if (const auto n = root["switch"]) {
    p.allow(n, {"ports", "reconfigure_ms"}, "switch");
    sc.switch_ports = static_cast<int>(p.count(n, "ports", 8));
    sc.reconfigure_seconds = p.number(n, "reconfigure_ms", 10.0) / 1000.0;
    if (sc.switch_ports < 2 || sc.reconfigure_seconds < 0.0) p.error(n, "switch needs >= 2 ports and a non-negative delay");
  }
  sc.session_seconds = sc.run_seconds;
  if (const auto n = root["network"]) {
    p.allow(n, {"session_seconds"}, "network");
    sc.session_seconds = p.number(n, "session_seconds", sc.session_seconds);
    if (sc.session_seconds <= 0.0) p.error(n, "session_seconds must be positive");
  }

  LinkParams defaults;
  defaults.detector_efficiency = 0.1;
  if (const auto n = root["link_defaults"]) {
    p.allow(n, {"detector_efficiency", "dark_count_prob", "misalignment", "clock_hz", "duty_cycle"}, "link_defaults");
    defaults.detector_efficiency = p.number(n, "detector_efficiency", defaults.detector_efficiency);
    defaults.dark_count_prob = p.number(n, "dark_count_prob", defaults.dark_count_prob);
    defaults.misalignment = p.number(n, "misalignment", defaults.misalignment);
    defaults.clock_hz = p.number(n, "clock_hz", defaults.clock_hz);
    defaults.duty_cycle = p.number(n, "duty_cycle", defaults.duty_cycle);
  }

  std::vector<StatsRecord> stats;
  if (const auto n = root["calibration_stats"]) {
    StatsDefaults sd;
    sd.intensity = sc.intensity;
    sd.run_seconds = sc.run_seconds;
    sd.clock_hz = defaults.clock_hz;
    sd.duty_cycle = defaults.duty_cycle;
    stats = load_stats(base_dir / p.text(n, "calibration_stats"), sd);
  }

  std::map<std::string, AccessFiber> access;
  const auto nodes = root["nodes"];
  if (!nodes || !nodes.IsSequence() || nodes.size() == 0) fail(ErrorCode::parse, source + ": nodes must be a non-empty list");
  for (const auto& n : nodes) {
    p.allow(n, {"name", "port", "terminal", "relay", "access_loss_db", "access_km"}, "node");
    NodeInfo info;
    info.name = p.text(n["name"], "node name");
    info.terminal = p.flag(n, "terminal", true);
    info.relay = p.flag(n, "relay", false);
    if (n["port"]) info.port = static_cast<int>(p.count(n["port"], "port"));
    access[info.name] = {p.number(n, "access_loss_db", 0.0), p.number(n, "access_km", 0.0)};
    try {
      sc.topology.add_node(std::move(info));
    } catch (const Error& e) {
      p.error(n, e.what());
    }
  }
  try {
    sc.topology.validate(sc.switch_ports);
  } catch (const Error& e) {
    fail(ErrorCode::parse, source + ": " + e.what());
  }

  const auto links = root["links"];
  if (links && !links.IsSequence()) p.error(links, "links must be a list");
  for (const auto& n : links) {
    p.allow(n,
            {"name", "from", "to", "calibrate", "stats", "fiber_loss_db", "distance_km", "insertion_loss_db",
             "detector_efficiency", "dark_count_prob", "misalignment", "clock_hz", "duty_cycle", "pulse_cap"},
            "link");
    LinkSpec spec;
    spec.from = p.text(n["from"], "link from");
    spec.to = p.text(n["to"], "link to");
    spec.name = n["name"] ? p.text(n["name"], "link name") : spec.from + "-" + spec.to;
    if (!access.contains(spec.from) || !access.contains(spec.to)) p.error(n, "link " + spec.name + " names an unknown node");
    spec.pulse_cap = p.count(n, "pulse_cap", sc.pulse_cap);
    if (spec.pulse_cap == 0) p.error(n, "pulse_cap must be positive");

    LinkParams& lp = spec.params;
    lp = defaults;
    lp.name = spec.name;
    // Switched paths run through both access fibers.
    const AccessFiber& fa = access[spec.from];
    const AccessFiber& fb = access[spec.to];
    lp.fiber_loss_db = p.number(n, "fiber_loss_db", fa.loss_db + fb.loss_db);
    lp.distance_km = p.number(n, "distance_km", fa.km + fb.km);
    lp.detector_efficiency = p.number(n, "detector_efficiency", lp.detector_efficiency);

    const bool calibrate = p.flag(n, "calibrate", false);
    if (calibrate) {
      for (const char* key : {"insertion_loss_db", "dark_count_prob", "misalignment"}) {
        if (n[key]) p.error(n[key], std::string(key) + " is solved by calibration and cannot be set");
      }
      const std::string row = n["stats"] ? p.text(n["stats"], "stats") : spec.name;
      const StatsRecord* rec = find_stats(stats, row);
      if (!rec) p.error(n, "no calibration stats row named " + row);
      if (!rec->error.empty()) p.error(n, "calibration stats row " + row + " is invalid: " + rec->error);
      lp.clock_hz = p.number(n, "clock_hz", rec->clock_hz);
      lp.duty_cycle = p.number(n, "duty_cycle", rec->duty_cycle);
      try {
        lp = calibrate_link(rec->stats, lp);
      } catch (const Error& e) {
        p.error(n, "calibrating " + spec.name + ": " + e.what());
      }
      spec.reference = *rec;
    } else {
      lp.insertion_loss_db = p.number(n, "insertion_loss_db", lp.insertion_loss_db);
      lp.dark_count_prob = p.number(n, "dark_count_prob", lp.dark_count_prob);
      lp.misalignment = p.number(n, "misalignment", lp.misalignment);
      lp.clock_hz = p.number(n, "clock_hz", lp.clock_hz);
      lp.duty_cycle = p.number(n, "duty_cycle", lp.duty_cycle);
    }
    try {
      lp.validate();
      sc.topology.add_link(spec.from, spec.to, lp);
    } catch (const Error& e) {
      p.error(n, e.what());
    }
    sc.links.push_back(std::move(spec));
  }

  std::uint64_t next_id = 1;
  if (const auto reqs = root["requests"]) {
    if (!reqs.IsSequence()) p.error(reqs, "requests must be a list");
    for (const auto& n : reqs) {
      p.allow(n, {"src", "dst", "at", "priority"}, "request");
      ConnectionRequest r;
      r.id = next_id++;
      r.src = p.text(n["src"], "request src");
      r.dst = p.text(n["dst"], "request dst");
      r.arrival = p.number(n, "at", 0.0);
      r.priority = static_cast<int>(p.count(n, "priority", 0));
      if (r.src == r.dst) p.error(n, "request src and dst must differ");
      if (!sc.topology.has_node(r.src) || !sc.topology.has_node(r.dst)) p.error(n, "request names an unknown node");
      if (r.arrival < 0.0) p.error(n, "request time must be non-negative");
      sc.requests.push_back(std::move(r));
    }
  }
  if (const auto traffic = root["traffic"]) {
    if (!traffic.IsSequence()) p.error(traffic, "traffic must be a list");
    for (const auto& n : traffic) {
      p.allow(n, {"src", "dst", "at", "bytes", "count", "interval"}, "traffic");
      TrafficSpec t;
      t.src = p.text(n["src"], "traffic src");
      t.dst = p.text(n["dst"], "traffic dst");
      t.at = p.number(n, "at", 0.0);
      t.bytes = p.count(n, "bytes", 0);
      t.count = p.count(n, "count", 1);
      t.interval = p.number(n, "interval", 1.0);
      if (t.src == t.dst) p.error(n, "traffic src and dst must differ");
      if (!sc.topology.has_node(t.src) || !sc.topology.has_node(t.dst)) p.error(n, "traffic names an unknown node");
      if (t.bytes == 0 || t.at < 0.0 || t.interval < 0.0) p.error(n, "traffic needs bytes > 0 and non-negative times");
      sc.traffic.push_back(std::move(t));
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path(), path.string());
}

}  // namespace qkdnet
