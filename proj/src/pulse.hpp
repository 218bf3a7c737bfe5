#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace qkdnet {

enum class Basis : std::uint8_t { rectilinear = 0, diagonal = 1 };

enum class PulseClass : std::uint8_t { signal = 0, decoy = 1, vacuum = 2 };

inline constexpr std::array<PulseClass, 3> kPulseClasses{PulseClass::signal, PulseClass::decoy,
                                                         PulseClass::vacuum};

constexpr std::string_view to_string(PulseClass c) {
  switch (c) {
    case PulseClass::signal: return "signal";
    case PulseClass::decoy: return "decoy";
    case PulseClass::vacuum: return "vacuum";
  }
  return "?";
}

/// One emitted pulse. bit x basis selects one of H/V/+45/-45; for vacuum
/// pulses the bit carries no information and is ignored downstream.
struct PulseRecord {
  std::uint64_t index = 0;
  std::uint8_t bit = 0;
  Basis basis = Basis::rectilinear;
  PulseClass pulse_class = PulseClass::signal;
};

/// Receiver outcome for one gate; bit and basis are meaningful only when clicked.
struct DetectionRecord {
  std::uint64_t index = 0;
  Basis basis = Basis::rectilinear;
  std::uint8_t bit = 0;
  bool clicked = false;
  bool double_click = false;
};

}  // namespace qkdnet
