// qkdnet command line front end. Talks to the library through the C API only.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "qkdnet/qkdnet.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitAssertion = 1;
constexpr int kExitError = 2;

struct ScenarioDeleter {
  void operator()(qkdnet_scenario* s) const { qkdnet_scenario_free(s); }
};
struct ResultDeleter {
  void operator()(qkdnet_result* r) const { qkdnet_result_free(r); }
};
using ScenarioPtr = std::unique_ptr<qkdnet_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<qkdnet_result, ResultDeleter>;

struct Options {
  std::string scenario;
  std::string stats;
  std::string link;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> f;
  std::optional<double> q;
  std::optional<double> k_sigma;
  bool simulate = false;
};

class Failure : public std::runtime_error {
 public:
  explicit Failure(const std::string& what) : std::runtime_error(what) {}
};

void check(qkdnet_status st, const std::string& context) {
  if (st != QKDNET_OK) {
    throw Failure(context + ": " + qkdnet_status_name(st) + ": " + qkdnet_last_error());
  }
}

qkdnet_rate_settings rate_settings(const Options& o, qkdnet_rate_settings base) {
  if (o.f) base.f = *o.f;
  if (o.q) base.q = *o.q;
  if (o.k_sigma) base.k_sigma = *o.k_sigma;
  return base;
}

bool has_rate_override(const Options& o) { return o.f || o.q || o.k_sigma; }

ScenarioPtr load(const Options& o) {
  qkdnet_scenario* raw = nullptr;
  check(qkdnet_scenario_load(o.scenario.c_str(), &raw), o.scenario);
  ScenarioPtr sc(raw);
  if (o.seed) check(qkdnet_scenario_set_seed(sc.get(), *o.seed), "--seed");
  if (has_rate_override(o)) {
    const qkdnet_rate_settings rs = rate_settings(o, qkdnet_default_rate_settings());
    check(qkdnet_scenario_set_rate(sc.get(), &rs), "rate settings");
  }
  return sc;
}

void write_file(const Options& o, const std::string& name, const char* text) {
  if (o.out.empty()) return;
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Failure("cannot write " + path.string());
  f << text;
}

int finish(const Options& o, qkdnet_result* r, const char* table_name) {
  const char* table = qkdnet_result_text(r, QKDNET_SECTION_TABLE);
  const char* summary = qkdnet_result_text(r, QKDNET_SECTION_SUMMARY);
  std::fputs(table, stdout);
  std::fputs(summary, stderr);
  if (*table) write_file(o, table_name, table);
  if (*summary) write_file(o, "summary.txt", summary);
  for (std::size_t i = 0; i < qkdnet_result_attachment_count(r); ++i) {
    write_file(o, qkdnet_result_attachment_name(r, i), qkdnet_result_attachment_text(r, i));
  }
  return qkdnet_result_passed(r) ? 0 : kExitAssertion;
}

int cmd_run_link(const Options& o) {
  ScenarioPtr sc = load(o);
  qkdnet_result* raw = nullptr;
  check(qkdnet_run_link(sc.get(), o.link.empty() ? nullptr : o.link.c_str(), &raw), "run-link");
  ResultPtr r(raw);
  return finish(o, r.get(), "links.tsv");
}

int cmd_run_network(const Options& o) {
  ScenarioPtr sc = load(o);
  qkdnet_result* raw = nullptr;
  check(qkdnet_run_network(sc.get(), &raw), "run-network");
  ResultPtr r(raw);
  std::fputs(qkdnet_result_text(r.get(), QKDNET_SECTION_EVENTS), stdout);
  std::fputs(qkdnet_result_text(r.get(), QKDNET_SECTION_SUMMARY), stderr);
  write_file(o, "events.log", qkdnet_result_text(r.get(), QKDNET_SECTION_EVENTS));
  write_file(o, "budgets.tsv", qkdnet_result_text(r.get(), QKDNET_SECTION_BUDGETS));
  write_file(o, "messages.tsv", qkdnet_result_text(r.get(), QKDNET_SECTION_MESSAGES));
  write_file(o, "summary.txt", qkdnet_result_text(r.get(), QKDNET_SECTION_SUMMARY));
  return qkdnet_result_passed(r.get()) ? 0 : kExitAssertion;
}

int cmd_analyze(const Options& o) {
  ScenarioPtr sc;
  if (!o.scenario.empty()) sc = load(o);
  qkdnet_result* raw = nullptr;
  // With a scenario the overrides are already applied to it.
  const qkdnet_rate_settings rs = rate_settings(o, qkdnet_default_rate_settings());
  const bool override_only = !sc && has_rate_override(o);
  check(qkdnet_analyze_file(o.stats.c_str(), sc.get(), override_only ? &rs : nullptr, &raw), "analyze");
  ResultPtr r(raw);
  return finish(o, r.get(), "analysis.tsv");
}

int cmd_calibrate(const Options& o) {
  ScenarioPtr sc = load(o);
  qkdnet_result* raw = nullptr;
  check(qkdnet_calibrate(sc.get(), &raw), "calibrate");
  ResultPtr r(raw);
  return finish(o, r.get(), "calibration.tsv");
}

int cmd_report(const Options& o) {
  ScenarioPtr sc = load(o);
  qkdnet_result* raw = nullptr;
  check(qkdnet_report(sc.get(), o.simulate ? 1 : 0, &raw), "report");
  ResultPtr r(raw);
  return finish(o, r.get(), "report.tsv");
}

void add_rate_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--f", o.f, "Error-correction inefficiency (default 1.22)");
  cmd->add_option("--q", o.q, "Sifting factor (default 3/8)");
  cmd->add_option("--k-sigma", o.k_sigma, "Fluctuation width in standard deviations (default 10)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoy-state BB84 network simulator"};
  app.require_subcommand(1);
  Options o;

  auto* run_link = app.add_subcommand("run-link", "Simulate one session per link and analyse it");
  run_link->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_link->add_option("--link", o.link, "Link name (default: every link)");
  run_link->add_option("--seed", o.seed, "Override the scenario seed");
  run_link->add_option("--out", o.out, "Directory for the table, summary and transcripts");
  add_rate_flags(run_link, o);

  auto* run_network = app.add_subcommand("run-network", "Run the scripted network scenario");
  run_network->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_network->add_option("--seed", o.seed, "Override the scenario seed");
  run_network->add_option("--out", o.out, "Directory for the event log, budgets and messages");
  add_rate_flags(run_network, o);

  auto* analyze = app.add_subcommand("analyze", "Decoy-state analysis of a stats file");
  analyze->add_option("--stats", o.stats, "Stats file (CSV)")->required()->check(CLI::ExistingFile);
  analyze->add_option("--scenario", o.scenario, "Scenario supplying intensities, rate settings and run length")
      ->check(CLI::ExistingFile);
  analyze->add_option("--out", o.out, "Output directory");
  add_rate_flags(analyze, o);

  auto* calibrate = app.add_subcommand("calibrate", "Show the link parameters solved from the stats");
  calibrate->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--out", o.out, "Output directory");

  auto* report = app.add_subcommand("report", "Per-link rate table");
  report->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  report->add_flag("--simulate", o.simulate, "Simulate sessions instead of using the model");
  report->add_option("--seed", o.seed, "Override the scenario seed");
  report->add_option("--out", o.out, "Output directory");
  add_rate_flags(report, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_link) return cmd_run_link(o);
    if (*run_network) return cmd_run_network(o);
    if (*analyze) return cmd_analyze(o);
    if (*calibrate) return cmd_calibrate(o);
    if (*report) return cmd_report(o);
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
