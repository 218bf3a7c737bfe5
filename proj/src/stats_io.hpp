#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "decoy_analysis.hpp"
#include "phys_model.hpp"

namespace qkdnet {

/// One row of a stats file. Rows that parse but fail validation carry the
/// reason in `error` and are reported rather than analysed.
struct StatsRecord {
  std::size_t line = 0;
  std::string link;
  MeasuredStats stats;
  double clock_hz = 4.0e6;
  double duty_cycle = 0.8;
  std::optional<double> ref_sifted_bps;
  std::optional<double> ref_final_bps;
  std::string error;
};

/// Defaults applied to columns a stats file leaves out.
struct StatsDefaults {
  IntensitySettings intensity;
  double run_seconds = 400.0;
  double clock_hz = 4.0e6;
  double duty_cycle = 0.8;
};

/// Comma-separated, first non-comment line is the header. Required columns:
/// link, Q_mu, E_mu, Q_nu, E_nu, Y_0. Optional: mu, nu, N_mu, N_nu, N_0,
/// clock_hz, duty_cycle, ref_sifted_bps, ref_final_bps. Missing pulse counts
/// come from the run_seconds budget. '#' starts a comment.
///
/// Throws Error(parse) with "<source>:<line>:" on malformed input.
std::vector<StatsRecord> parse_stats(std::istream& in, const std::string& source, const StatsDefaults& defaults);
std::vector<StatsRecord> load_stats(const std::filesystem::path& path, const StatsDefaults& defaults);

/// Looks a link up by name; null when absent.
const StatsRecord* find_stats(const std::vector<StatsRecord>& records, const std::string& link);

}  // namespace qkdnet
