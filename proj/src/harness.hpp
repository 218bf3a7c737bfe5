#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "keystore.hpp"
#include "scenario.hpp"
#include "session.hpp"
#include "stats_io.hpp"

namespace qkdnet {

// ---- analyze --------------------------------------------------------------

struct AnalysisRow {
  StatsRecord record;
  DecoyEstimate estimate;
  double final_bps = 0.0;
  /// clock x duty x signal fraction x Q_mu / 2
  double sifted_bps = 0.0;
  /// Empty when the row was analysed; otherwise why it was skipped.
  std::string flag;
};

std::vector<AnalysisRow> analyze_records(const std::vector<StatsRecord>& records, const RateSettings& rate,
                                         const IntensitySettings& intensity = {});
std::string format_analysis(const std::vector<AnalysisRow>& rows);

double sifted_rate_bps(const MeasuredStats& stats, double clock_hz, double duty_cycle,
                       const IntensitySettings& intensity);

// ---- calibrate ------------------------------------------------------------

struct CalibrationRow {
  std::string link;
  LinkParams params;
  MeasuredStats reference;
  MeasuredStats predicted;
};

/// Re-solves every calibrated link of the scenario and reports how well the
/// model reproduces the stats it was not fitted to (Q_nu, E_nu).
std::vector<CalibrationRow> calibration_table(const Scenario& sc);
std::string format_calibration(const std::vector<CalibrationRow>& rows);

// ---- run-link -------------------------------------------------------------

struct LinkRun {
  LinkSpec spec;
  /// Pulse counts of a run_seconds run; the finite-size bounds use these.
  PulseBudget budget;
  /// Model prediction at the same counts.
  MeasuredStats expected;
  DecoyEstimate expected_estimate;
  SessionResult session;
  double expected_bps = 0.0;
  double simulated_bps = 0.0;
};

SessionConfig session_config(const Scenario& sc, const LinkSpec& spec, double seconds, std::uint64_t pulse_cap);
std::uint64_t link_seed(std::uint64_t scenario_seed, const std::string& link);

/// One seeded session on the link at the link's pulse cap, analysed as a
/// run_seconds run. `pulse_cap` overrides the link's cap when nonzero.
LinkRun run_link(const Scenario& sc, const std::string& link, std::optional<std::uint64_t> seed = std::nullopt,
                 std::uint64_t pulse_cap = 0);

/// How far a simulated session sits from the model it was drawn from.
struct ClosureCheck {
  /// |measured - expected| / standard error, per observable.
  std::map<std::string, double> z;
  double max_z = 0.0;
  /// R(simulated stats) / R(expected stats) - 1.
  double rate_deviation = 0.0;
};

ClosureCheck closure_check(const LinkRun& run);

std::string format_link_runs(const std::vector<LinkRun>& runs);

// ---- report ---------------------------------------------------------------

/// Model-only table: expected stats of every link at the run_seconds budget.
std::string format_expected_report(const Scenario& sc);

// ---- run-network ----------------------------------------------------------

struct MessageOutcome {
  std::size_t traffic = 0;
  std::size_t sequence = 0;
  double time = 0.0;
  std::string src;
  std::string dst;
  std::size_t bytes = 0;
  std::string route;
  bool delivered = false;
  bool replay_refused = false;
  std::string error;
};

struct PairBudget {
  NodePair pair;
  std::size_t sessions = 0;
  std::uint64_t produced = 0;
  std::uint64_t consumed_forward = 0;
  std::uint64_t consumed_backward = 0;
  std::uint64_t available = 0;
  bool copies_agree = true;
};

struct NetworkResult {
  std::vector<std::string> events;
  std::vector<MessageOutcome> messages;
  std::vector<PairBudget> budgets;
  std::size_t sessions = 0;
  std::size_t exhausted = 0;
  /// Key bytes handed out twice within one pool copy; must stay empty.
  std::vector<std::string> audit_violations;
  /// Scripted assertions that did not hold.
  std::vector<std::string> failures;
  /// Every pool copy, keyed by "first-second@owner".
  std::map<std::string, KeyPool> pools;

  bool passed() const { return failures.empty() && audit_violations.empty(); }
  std::string event_log() const;
  std::string format_budgets() const;
  std::string format_messages() const;
};

/// Drives requests through the scheduler, runs the QKD sessions they set up,
/// deposits the keys and replays the scripted OTP traffic, directly or through
/// the relay. Every delivered message is replayed once and must be refused.
NetworkResult run_network(const Scenario& sc);

}  // namespace qkdnet
