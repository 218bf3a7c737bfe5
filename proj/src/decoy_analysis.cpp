#include "decoy_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace qkdnet {

namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

void MeasuredStats::validate() const {
  require(std::isfinite(mu) && std::isfinite(nu) && nu > 0.0, ErrorCode::domain,
          "intensities must be finite and positive");
  require(mu > nu, ErrorCode::invalid_intensity_ordering, "invalid intensity ordering: mu must exceed nu");
  require(is_probability(q_mu) && is_probability(q_nu) && is_probability(y0), ErrorCode::domain,
          "gains must lie in [0, 1]");
  require(is_probability(e_mu) && e_mu <= 0.5 && is_probability(e_nu) && e_nu <= 0.5, ErrorCode::domain,
          "error rates must lie in [0, 0.5]");
  require(n_mu >= 0.0 && n_nu >= 0.0 && n_0 >= 0.0, ErrorCode::domain, "pulse counts must be non-negative");
}

void RateSettings::validate() const {
  require(std::isfinite(f) && f >= 1.0, ErrorCode::domain, "error-correction efficiency f must be >= 1");
  require(q > 0.0 && q <= 1.0, ErrorCode::domain, "protocol efficiency q must lie in (0, 1]");
  require(std::isfinite(k_sigma) && k_sigma >= 0.0, ErrorCode::domain, "k_sigma must be non-negative");
}

double binary_entropy(double x) {
  require(x >= 0.0 && x <= 1.0, ErrorCode::domain, "binary entropy argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

FluctuationBounds fluctuation_bounds(const MeasuredStats& stats, double k_sigma) {
  require(std::isfinite(k_sigma) && k_sigma >= 0.0, ErrorCode::domain, "k_sigma must be non-negative");
  FluctuationBounds b{stats.q_nu, stats.y0, stats.y0};
  if (k_sigma == 0.0) return b;

  const double decoy_counts = stats.n_nu * stats.q_nu;
  require(decoy_counts > 0.0, ErrorCode::insufficient_decoy_data, "insufficient decoy data: N_nu * Q_nu = 0");
  b.q_nu_lower = std::max(0.0, stats.q_nu * (1.0 - k_sigma / std::sqrt(decoy_counts)));

  require(stats.n_0 > 0.0, ErrorCode::insufficient_decoy_data, "insufficient decoy data: no vacuum pulses");
  if (stats.y0 == 0.0) {
    // No vacuum clicks observed: k^2/N0 is the k-sigma Poisson allowance for zero counts.
    b.y0_lower = 0.0;
    b.y0_upper = k_sigma * k_sigma / stats.n_0;
  } else {
    const double width = k_sigma / std::sqrt(stats.n_0 * stats.y0);
    b.y0_lower = std::max(0.0, stats.y0 * (1.0 - width));
    b.y0_upper = stats.y0 * (1.0 + width);
  }
  return b;
}

namespace {

SinglePhotonBounds bounds_from(const MeasuredStats& s, const FluctuationBounds& fb) {
  const double mu = s.mu;
  const double nu = s.nu;
  const double prefactor = mu * mu * std::exp(-mu) / (mu * nu - nu * nu);
  const double q1 = prefactor * (fb.q_nu_lower * std::exp(nu) - s.q_mu * std::exp(mu) * nu * nu / (mu * mu) -
                                 fb.y0_upper * (mu * mu - nu * nu) / (mu * mu));
  SinglePhotonBounds out;
  out.q1_lower = std::max(0.0, q1);
  if (out.q1_lower > 0.0) {
    const double e1 = (s.e_mu * s.q_mu - fb.y0_lower * std::exp(-mu) / 2.0) / out.q1_lower;
    out.e1_upper = std::clamp(e1, 0.0, 0.5);
  } else {
    out.e1_upper = 0.5;
  }
  return out;
}

}  // namespace

SinglePhotonBounds single_photon_bounds(const MeasuredStats& stats, const RateSettings& settings) {
  stats.validate();
  settings.validate();
  return bounds_from(stats, fluctuation_bounds(stats, settings.k_sigma));
}

DecoyEstimate key_rate(const MeasuredStats& stats, const RateSettings& settings) {
  stats.validate();
  settings.validate();
  const FluctuationBounds fb = fluctuation_bounds(stats, settings.k_sigma);
  const SinglePhotonBounds sp = bounds_from(stats, fb);

  DecoyEstimate est;
  est.q_nu_lower = fb.q_nu_lower;
  est.y0_lower = fb.y0_lower;
  est.y0_upper = fb.y0_upper;
  est.q1_lower = sp.q1_lower;
  est.e1_upper = sp.e1_upper;
  const double r = settings.q * (-stats.q_mu * settings.f * binary_entropy(stats.e_mu) +
                                 sp.q1_lower * (1.0 - binary_entropy(sp.e1_upper)));
  est.rate_per_pulse = std::max(0.0, r);
  est.confidence_tail = confidence_tail(settings.k_sigma);
  est.confidence = 1.0 - est.confidence_tail;
  return est;
}

double confidence_tail(double k_sigma) { return 0.5 * std::erfc(k_sigma / std::sqrt(2.0)); }

double confidence_level(double k_sigma) { return 1.0 - confidence_tail(k_sigma); }

}  // namespace qkdnet
