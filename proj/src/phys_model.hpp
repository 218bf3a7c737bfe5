#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "decoy_analysis.hpp"
#include "pulse.hpp"
#include "rng.hpp"

namespace qkdnet {

/// Physical description of one fiber link and the detector set behind it.
struct LinkParams {
  std::string name;
  double distance_km = 0.0;
  double fiber_loss_db = 0.0;
  /// Receiver optics plus switch; calibrated rather than measured.
  double insertion_loss_db = 0.0;
  double detector_efficiency = 1.0;
  /// Per gate, per detector.
  double dark_count_prob = 0.0;
  /// Probability that a detected photon lands in the wrong detector.
  double misalignment = 0.0;
  double clock_hz = 4.0e6;
  /// Fraction of wall time spent generating key (the rest goes to feedback control).
  double duty_cycle = 0.8;

  void validate() const;
};

struct IntensitySettings {
  double mu = 0.6;
  double nu = 0.2;
  /// Relative weights of signal, decoy and vacuum pulses.
  std::array<std::uint32_t, 3> occupancy{6, 1, 1};

  void validate() const;
  double mean_photon(PulseClass c) const;
  double fraction(PulseClass c) const;
};

/// Pulse counts per class for a run of a given length.
struct PulseBudget {
  double total = 0.0;
  double signal = 0.0;
  double decoy = 0.0;
  double vacuum = 0.0;
};

PulseBudget pulse_budget(double seconds, double clock_hz, double duty_cycle, const IntensitySettings& intensity);

/// eta = 10^(-(fiber + insertion)/10) * detector_efficiency.
double transmittance(const LinkParams& link);

/// Click probability per gate with no photon present: 1 - (1 - d)^2 for the
/// two detectors of the measured basis.
double background_yield(const LinkParams& link);

double expected_gain(double mean_photon, const LinkParams& link);

/// Throws Error(undefined_qber) when the gain is zero.
double expected_qber(double mean_photon, const LinkParams& link);

/// Analytic observables of the link for the given pulse counts.
MeasuredStats expected_stats(const LinkParams& link, const IntensitySettings& intensity, const PulseBudget& counts);

/// Solves, in closed form, for the insertion loss, dark-count probability and
/// misalignment that make the link reproduce Q_mu, E_mu and Y_0 exactly.
/// Fiber loss, detector efficiency, clock and duty cycle come from base.
LinkParams calibrate_link(const MeasuredStats& measured, const LinkParams& base);

/// Draws the receiver outcome for one pulse. Photon detection and background
/// clicks are independent; when both occur the gate is a double click and the
/// bit is assigned uniformly at random.
DetectionRecord sample_detection(const PulseRecord& pulse, const LinkParams& link,
                                 const IntensitySettings& intensity, Rng& rng);

}  // namespace qkdnet
