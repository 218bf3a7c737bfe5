#pragma once

#include <cstdint>

namespace qkdnet {

/// Per-session observables of one link: gains, error rates and pulse counts
/// for the signal (mu), decoy (nu) and vacuum classes.
///
/// Pulse counts are doubles.
struct MeasuredStats {
  double mu = 0.6;
  double nu = 0.2;
  double q_mu = 0.0;
  double e_mu = 0.0;
  double q_nu = 0.0;
  double e_nu = 0.0;
  double y0 = 0.0;
  double n_mu = 0.0;
  double n_nu = 0.0;
  double n_0 = 0.0;

  /// Throws Error(domain) when a field is out of range and
  /// Error(invalid_intensity_ordering) when mu <= nu.
  void validate() const;
};

struct RateSettings {
  double f = 1.22;        // error-correction efficiency relative to the Shannon limit
  double q = 3.0 / 8.0;   // sifting (1/2) times signal occupancy (6/8)
  double k_sigma = 10.0;  // width of the statistical fluctuation allowance; 0 = asymptotic

  void validate() const;
};

struct FluctuationBounds {
  double q_nu_lower = 0.0;
  double y0_lower = 0.0;
  double y0_upper = 0.0;
};

struct SinglePhotonBounds {
  double q1_lower = 0.0;
  double e1_upper = 0.5;
};

struct DecoyEstimate {
  double q_nu_lower = 0.0;
  double y0_lower = 0.0;
  double y0_upper = 0.0;
  double q1_lower = 0.0;
  double e1_upper = 0.5;
  double rate_per_pulse = 0.0;
  double confidence = 0.0;
  /// 1 - confidence; the subtraction underflows.
  double confidence_tail = 1.0;
};

/// H2(x) = -x log2 x - (1-x) log2(1-x), continuous at the endpoints.
double binary_entropy(double x);

FluctuationBounds fluctuation_bounds(const MeasuredStats& stats, double k_sigma);

/// Lower bound on the single-photon gain and upper bound on its error rate.
/// Q1_L is clamped at 0, e1_U to [0, 0.5]; Q1_L == 0 forces e1_U = 0.5.
SinglePhotonBounds single_photon_bounds(const MeasuredStats& stats, const RateSettings& settings);

/// Secure key per emitted pulse, clamped at zero, plus every intermediate bound.
DecoyEstimate key_rate(const MeasuredStats& stats, const RateSettings& settings);

/// Standard-normal upper tail at k_sigma, via erfc.
double confidence_tail(double k_sigma);
double confidence_level(double k_sigma);

/// Wall-clock rate: per-pulse rate times clock times the protocol-useful duty cycle.
inline double rate_bps(const DecoyEstimate& est, double clock_hz, double duty_cycle) {
  return est.rate_per_pulse * clock_hz * duty_cycle;
}

}  // namespace qkdnet
