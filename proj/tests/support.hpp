#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "decoy_analysis.hpp"
#include "phys_model.hpp"

namespace qkdnet::test {

inline std::filesystem::path source_dir() { return QKDNET_SOURCE_DIR; }
inline std::filesystem::path scenario_path(const std::string& name) { return source_dir() / "scenarios" / name; }
inline std::filesystem::path fixture_path(const std::string& name) { return source_dir() / "fixtures" / name; }

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Meilan -> USTC row of the fixture, with the 400 s / 4 MHz pulse budget.
inline MeasuredStats meilan_stats() {
  MeasuredStats s;
  s.q_mu = 8.21e-3;
  s.e_mu = 0.0158;
  s.q_nu = 2.71e-3;
  s.e_nu = 0.0400;
  s.y0 = 2.03e-4;
  s.n_mu = 9.6e8;
  s.n_nu = 1.6e8;
  s.n_0 = 1.6e8;
  return s;
}

// Feixi -> USTC at 320 MHz.
inline MeasuredStats feixi_stats() {
  MeasuredStats s;
  s.q_mu = 1.64e-4;
  s.e_mu = 0.0113;
  s.q_nu = 6.60e-5;
  s.e_nu = 0.0171;
  s.y0 = 1.13e-6;
  s.n_mu = 7.68e10;
  s.n_nu = 1.28e10;
  s.n_0 = 1.28e10;
  return s;
}

inline LinkParams test_link(double fiber_db, double dark, double misalignment) {
  LinkParams l;
  l.name = "test";
  l.fiber_loss_db = fiber_db;
  l.detector_efficiency = 0.1;
  l.dark_count_prob = dark;
  l.misalignment = misalignment;
  return l;
}

}  // namespace qkdnet::test
