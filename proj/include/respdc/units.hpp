#pragma once

#include <numbers>

namespace respdc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kMHz = 1e6;
inline constexpr double kGHz = 1e9;
inline constexpr double kTHz = 1e12;
inline constexpr double kNm = 1e-9;
inline constexpr double kUm = 1e-6;
inline constexpr double kMm = 1e-3;

inline double wavelength_to_frequency(double wavelength_m) { return kSpeedOfLight / wavelength_m; }
inline double frequency_to_wavelength(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

// Closed frequency interval [lo, hi] in Hz.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  static Interval around(double center, double halfwidth) { return {center - halfwidth, center + halfwidth}; }
};

}  // namespace respdc
