#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "decoy_analysis.hpp"
#include "netfabric.hpp"
#include "phys_model.hpp"
#include "stats_io.hpp"

namespace qkdnet {

struct LinkSpec {
  std::string name;
  std::string from;
  std::string to;
  LinkParams params;
  /// Simulated pulses per session; the scenario-wide cap unless overridden.
  std::uint64_t pulse_cap = 10'000'000;
  /// Present when the link was calibrated from a stats row.
  std::optional<StatsRecord> reference;
};

struct TrafficSpec {
  std::string src;
  std::string dst;
  double at = 0.0;
  std::size_t bytes = 0;
  std::size_t count = 1;
  double interval = 1.0;
};

struct Scenario {
  std::filesystem::path source;
  std::uint64_t seed = 0;
  double run_seconds = 400.0;
  std::uint64_t pulse_cap = 10'000'000;
  IntensitySettings intensity;
  RateSettings rate;
  double test_fraction = 0.1;
  std::size_t safety_bits = 64;

  int switch_ports = 8;
  double reconfigure_seconds = 0.010;
  /// Simulated length of one network QKD session.
  double session_seconds = 400.0;

  NetworkTopology topology;
  std::vector<LinkSpec> links;
  std::vector<ConnectionRequest> requests;
  std::vector<TrafficSpec> traffic;

  const LinkSpec& link(const std::string& name) const;
  /// Link serving the pair, preferring the a -> b direction.
  const LinkSpec& link_between(const std::string& a, const std::string& b) const;
};

/// YAML scenario; see docs/formats.md for the grammar. Relative paths inside
/// the file resolve against base_dir. Throws Error(parse) or Error(not_found).
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace qkdnet
