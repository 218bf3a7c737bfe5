#include "stats_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"

namespace qkdnet {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
  fail(ErrorCode::parse, source + ":" + std::to_string(line) + ": " + what);
}

double to_number(const std::string& text, const std::string& column, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) {
    parse_error(source, line, "column " + column + ": '" + text + "' is not a number");
  }
  return v;
}

const std::vector<std::string> kRequired{"link", "Q_mu", "E_mu", "Q_nu", "E_nu", "Y_0"};
const std::vector<std::string> kOptional{"mu", "nu", "N_mu", "N_nu", "N_0", "clock_hz", "duty_cycle",
                                         "ref_sifted_bps", "ref_final_bps"};

}  // namespace

std::vector<StatsRecord> parse_stats(std::istream& in, const std::string& source, const StatsDefaults& defaults) {
  std::vector<StatsRecord> records;
  std::map<std::string, std::size_t> column;
  bool have_header = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto fields = split_csv(line);

    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const bool known = std::find(kRequired.begin(), kRequired.end(), fields[i]) != kRequired.end() ||
                           std::find(kOptional.begin(), kOptional.end(), fields[i]) != kOptional.end();
        if (!known) parse_error(source, line_no, "unknown column '" + fields[i] + "'");
        if (!column.emplace(fields[i], i).second) parse_error(source, line_no, "duplicate column '" + fields[i] + "'");
      }
      for (const auto& name : kRequired) {
        if (!column.contains(name)) parse_error(source, line_no, "missing required column '" + name + "'");
      }
      have_header = true;
      continue;
    }

    if (fields.size() != column.size()) {
      parse_error(source, line_no,
                  "expected " + std::to_string(column.size()) + " fields, found " + std::to_string(fields.size()));
    }
    auto num = [&](const std::string& name) -> std::optional<double> {
      auto it = column.find(name);
      if (it == column.end() || fields[it->second].empty()) return std::nullopt;
      return to_number(fields[it->second], name, source, line_no);
    };
    auto must = [&](const std::string& name) {
      auto v = num(name);
      if (!v) parse_error(source, line_no, "column " + name + " is empty");
      return *v;
    };

    StatsRecord r;
    r.line = line_no;
    r.link = fields[column.at("link")];
    if (r.link.empty()) parse_error(source, line_no, "empty link name");
    MeasuredStats& s = r.stats;
    s.mu = num("mu").value_or(defaults.intensity.mu);
    s.nu = num("nu").value_or(defaults.intensity.nu);
    s.q_mu = must("Q_mu");
    s.e_mu = must("E_mu");
    s.q_nu = must("Q_nu");
    s.e_nu = must("E_nu");
    s.y0 = must("Y_0");
    r.clock_hz = num("clock_hz").value_or(defaults.clock_hz);
    r.duty_cycle = num("duty_cycle").value_or(defaults.duty_cycle);
    r.ref_sifted_bps = num("ref_sifted_bps");
    r.ref_final_bps = num("ref_final_bps");

    try {
      const PulseBudget budget = pulse_budget(defaults.run_seconds, r.clock_hz, r.duty_cycle, defaults.intensity);
      s.n_mu = num("N_mu").value_or(budget.signal);
      s.n_nu = num("N_nu").value_or(budget.decoy);
      s.n_0 = num("N_0").value_or(budget.vacuum);
      s.validate();
    } catch (const Error& e) {
      r.error = e.what();
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<StatsRecord> load_stats(const std::filesystem::path& path, const StatsDefaults& defaults) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open stats file " + path.string());
  return parse_stats(in, path.string(), defaults);
}

const StatsRecord* find_stats(const std::vector<StatsRecord>& records, const std::string& link) {
  for (const auto& r : records) {
    if (r.link == link) return &r;
  }
  return nullptr;
}

}  // namespace qkdnet
