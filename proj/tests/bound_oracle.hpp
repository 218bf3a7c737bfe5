#pragma once

// Second, independent transcription of the decoy bounds and key rate, in long
// double and without any shared helpers from the library.

#include <cmath>
#include <random>

#include "decoy_analysis.hpp"
#include "phys_model.hpp"

namespace qkdnet::test {

struct OracleOut {
  long double q_nu_l, y0_l, y0_u, q1_l, e1_u, rate;
};

inline OracleOut oracle_rate(const MeasuredStats& s, double f, double q, double k) {
  const long double mu = s.mu, nu = s.nu;
  const long double Qm = s.q_mu, Em = s.e_mu, Qn = s.q_nu, Y0 = s.y0;
  long double QnL = Qn * (1.0L - k / std::sqrt((long double)s.n_nu * Qn));
  if (QnL < 0) QnL = 0;
  long double Y0L = Y0 * (1.0L - k / std::sqrt((long double)s.n_0 * Y0));
  if (Y0L < 0) Y0L = 0;
  const long double Y0U = Y0 * (1.0L + k / std::sqrt((long double)s.n_0 * Y0));
  long double Q1 = mu * mu * std::exp(-mu) / (mu * nu - nu * nu) *
                   (QnL * std::exp(nu) - Qm * std::exp(mu) * nu * nu / (mu * mu) - Y0U * (mu * mu - nu * nu) / (mu * mu));
  if (Q1 < 0) Q1 = 0;
  long double e1 = 0.5L;
  if (Q1 > 0) {
    e1 = (Em * Qm - Y0L * std::exp(-mu) / 2.0L) / Q1;
    if (e1 < 0) e1 = 0;
    if (e1 > 0.5L) e1 = 0.5L;
  }
  auto h = [](long double x) -> long double {
    if (x <= 0 || x >= 1) return 0;
    return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
  };
  long double R = q * (-Qm * f * h(Em) + Q1 * (1 - h(e1)));
  if (R < 0) R = 0;
  return {QnL, Y0L, Y0U, Q1, e1, R};
}

// Valid stats drawn the way a real link produces them: random loss, dark count,
// misalignment and run length pushed through the channel model.
inline MeasuredStats random_stats(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LinkParams l;
  l.fiber_loss_db = 2.0 + 28.0 * u(g);
  l.detector_efficiency = 0.05 + 0.15 * u(g);
  l.dark_count_prob = std::pow(10.0, -7.0 + 3.0 * u(g));
  l.misalignment = 0.03 * u(g);
  IntensitySettings is;
  is.mu = 0.4 + 0.4 * u(g);
  is.nu = 0.05 + 0.25 * u(g);
  if (is.nu >= is.mu) is.nu = is.mu / 2;
  const double seconds = 100.0 + 900.0 * u(g);
  const double clock = u(g) < 0.5 ? 4e6 : 3.2e8;
  return expected_stats(l, is, pulse_budget(seconds, clock, 0.8, is));
}

}  // namespace qkdnet::test
