#pragma once

#include <array>
#include <cmath>

#include "phys_model.hpp"

namespace qkdnet {

// Per-class event thresholds precomputed once per link so the per-pulse path
// is one uniform draw plus, on a click, a few more.
class DetectionModel {
 public:
  DetectionModel(const LinkParams& link, const IntensitySettings& intensity) : misalignment_(link.misalignment) {
    const double eta = transmittance(link);
    const double y0 = background_yield(link);
    for (PulseClass c : kPulseClasses) {
      const double p = -std::expm1(-eta * intensity.mean_photon(c));
      Thresholds& t = thresholds_[static_cast<std::size_t>(c)];
      t.photon_only = p * (1.0 - y0);
      t.dark_only = t.photon_only + y0 * (1.0 - p);
      t.any = t.dark_only + p * y0;
    }
  }

  DetectionRecord sample(const PulseRecord& pulse, Rng& rng) const {
    const Thresholds& t = thresholds_[static_cast<std::size_t>(pulse.pulse_class)];
    DetectionRecord d;
    d.index = pulse.index;
    const double u = rng.uniform();
    if (u >= t.any) return d;

    d.clicked = true;
    d.basis = static_cast<Basis>(rng.bit());
    if (u < t.photon_only) {
      if (d.basis == pulse.basis) {
        d.bit = pulse.bit ^ static_cast<std::uint8_t>(rng.bernoulli(misalignment_));
      } else {
        d.bit = rng.bit();
      }
    } else {
      d.double_click = u >= t.dark_only;
      d.bit = rng.bit();
    }
    return d;
  }

 private:
  struct Thresholds {
    double photon_only = 0.0;
    double dark_only = 0.0;
    double any = 0.0;
  };
  double misalignment_;
  std::array<Thresholds, 3> thresholds_{};
};

}  // namespace qkdnet
