#include "phys_model.hpp"

#include <cmath>

#include "detection_model.hpp"
#include "error.hpp"

namespace qkdnet {

namespace {

bool is_fraction(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

void LinkParams::validate() const {
  require(std::isfinite(fiber_loss_db) && fiber_loss_db >= 0.0, ErrorCode::domain,
          "fiber_loss_db must be non-negative");
  require(std::isfinite(insertion_loss_db) && insertion_loss_db >= 0.0, ErrorCode::domain,
          "insertion_loss_db must be non-negative");
  require(is_fraction(detector_efficiency) && detector_efficiency > 0.0, ErrorCode::domain,
          "detector_efficiency must lie in (0, 1]");
  require(is_fraction(dark_count_prob), ErrorCode::domain, "dark_count_prob must lie in [0, 1]");
  require(is_fraction(misalignment), ErrorCode::domain, "misalignment must lie in [0, 1]");
  require(std::isfinite(clock_hz) && clock_hz > 0.0, ErrorCode::domain, "clock_hz must be positive");
  require(duty_cycle > 0.0 && duty_cycle <= 1.0, ErrorCode::domain, "duty_cycle must lie in (0, 1]");
  require(distance_km >= 0.0, ErrorCode::domain, "distance_km must be non-negative");
  require(transmittance(*this) > 0.0, ErrorCode::domain, "total transmittance underflows to zero");
}

void IntensitySettings::validate() const {
  require(std::isfinite(mu) && std::isfinite(nu) && nu > 0.0, ErrorCode::domain,
          "intensities must be finite and positive");
  require(mu > nu, ErrorCode::invalid_intensity_ordering, "invalid intensity ordering: mu must exceed nu");
  require(occupancy[0] > 0 && occupancy[1] > 0 && occupancy[2] > 0, ErrorCode::domain,
          "occupancy weights must be positive integers");
}

double IntensitySettings::mean_photon(PulseClass c) const {
  switch (c) {
    case PulseClass::signal: return mu;
    case PulseClass::decoy: return nu;
    case PulseClass::vacuum: return 0.0;
  }
  return 0.0;
}

double IntensitySettings::fraction(PulseClass c) const {
  const double total = static_cast<double>(occupancy[0]) + occupancy[1] + occupancy[2];
  return occupancy[static_cast<std::size_t>(c)] / total;
}

PulseBudget pulse_budget(double seconds, double clock_hz, double duty_cycle, const IntensitySettings& intensity) {
  require(seconds >= 0.0 && clock_hz > 0.0 && duty_cycle > 0.0 && duty_cycle <= 1.0, ErrorCode::domain,
          "pulse budget needs non-negative duration, positive clock and duty cycle in (0, 1]");
  PulseBudget b;
  b.total = seconds * clock_hz * duty_cycle;
  b.signal = b.total * intensity.fraction(PulseClass::signal);
  b.decoy = b.total * intensity.fraction(PulseClass::decoy);
  b.vacuum = b.total * intensity.fraction(PulseClass::vacuum);
  return b;
}

double transmittance(const LinkParams& link) {
  return std::pow(10.0, -(link.fiber_loss_db + link.insertion_loss_db) / 10.0) * link.detector_efficiency;
}

double background_yield(const LinkParams& link) {
  const double d = link.dark_count_prob;
  return d * (2.0 - d);
}

double expected_gain(double mean_photon, const LinkParams& link) {
  require(mean_photon >= 0.0, ErrorCode::domain, "mean photon number must be non-negative");
  const double y0 = background_yield(link);
  return y0 + (1.0 - y0) * -std::expm1(-transmittance(link) * mean_photon);
}

double expected_qber(double mean_photon, const LinkParams& link) {
  const double gain = expected_gain(mean_photon, link);
  require(gain > 0.0, ErrorCode::undefined_qber, "undefined QBER: expected gain is zero");
  const double detected = -std::expm1(-transmittance(link) * mean_photon);
  return (0.5 * background_yield(link) + link.misalignment * detected) / gain;
}

MeasuredStats expected_stats(const LinkParams& link, const IntensitySettings& intensity, const PulseBudget& counts) {
  MeasuredStats s;
  s.mu = intensity.mu;
  s.nu = intensity.nu;
  s.q_mu = expected_gain(intensity.mu, link);
  s.e_mu = expected_qber(intensity.mu, link);
  s.q_nu = expected_gain(intensity.nu, link);
  s.e_nu = expected_qber(intensity.nu, link);
  s.y0 = background_yield(link);
  s.n_mu = counts.signal;
  s.n_nu = counts.decoy;
  s.n_0 = counts.vacuum;
  return s;
}

LinkParams calibrate_link(const MeasuredStats& measured, const LinkParams& base) {
  require(measured.mu > 0.0, ErrorCode::domain, "calibration needs a positive signal intensity");
  require(measured.y0 >= 0.0 && measured.y0 < 1.0, ErrorCode::unphysical_statistics,
          "unphysical statistics: Y_0 outside [0, 1)");
  require(measured.q_mu > measured.y0 && measured.q_mu < 1.0, ErrorCode::unphysical_statistics,
          "unphysical statistics: Q_mu must exceed Y_0");

  // Fraction of gates with a detected photon, with background removed.
  const double detected = (measured.q_mu - measured.y0) / (1.0 - measured.y0);
  const double eta = -std::log1p(-detected) / measured.mu;
  const double eta_base = std::pow(10.0, -base.fiber_loss_db / 10.0) * base.detector_efficiency;
  double insertion_db = -10.0 * std::log10(eta / eta_base);
  if (insertion_db < 0.0 && insertion_db > -1e-9) insertion_db = 0.0;
  require(insertion_db >= 0.0, ErrorCode::unphysical_statistics,
          "unphysical statistics: observed gain exceeds what fiber loss and detector efficiency allow");

  const double misalignment = (measured.e_mu * measured.q_mu - 0.5 * measured.y0) / detected;
  require(misalignment >= 0.0 && misalignment <= 1.0, ErrorCode::unphysical_statistics,
          "unphysical statistics: E_mu below the background error floor");

  LinkParams out = base;
  out.insertion_loss_db = insertion_db;
  out.dark_count_prob = measured.y0 / (1.0 + std::sqrt(1.0 - measured.y0));
  out.misalignment = misalignment;
  return out;
}

DetectionRecord sample_detection(const PulseRecord& pulse, const LinkParams& link,
                                 const IntensitySettings& intensity, Rng& rng) {
  return DetectionModel(link, intensity).sample(pulse, rng);
}

}  // namespace qkdnet
