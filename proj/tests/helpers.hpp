#pragma once

#include <cmath>
#include <vector>

#include "respdc/cavity.hpp"
#include "respdc/config.hpp"
#include "respdc/phasematch.hpp"

namespace respdc::test {

inline constexpr double kDemoT = 148.14;
inline const double kDemoPump = kSpeedOfLight / 532e-9;

inline const SourceSpec& demonstrator() {
  static const SourceSpec s = demonstrator_source();
  return s;
}

inline const PhasematchPoint& demonstrator_setpoint() {
  static const PhasematchPoint p = double_resonance_setpoint(demonstrator(), kDemoPump, kDemoT);
  return p;
}

// Dispersion-free source with identical indices on both axes.
inline SourceSpec constant_spec(double n, double length_m, MirrorPair mirrors = {0.0, 0.0}, double loss_db = 0.0) {
  SourceSpec s;
  s.dispersion = DispersionModel::constant(n, n);
  s.length_m = length_m;
  s.poling_period_m = 5e-6;
  s.mirrors_signal = mirrors;
  s.mirrors_idler = mirrors;
  s.loss_signal_db_per_cm = loss_db;
  s.loss_idler_db_per_cm = loss_db;
  return s;
}

// Brute-force FWHM of |A(nu)|^2 around a resonance: dense scan over one FSR, linear
// interpolation of the half-maximum crossings.
inline double scanned_fwhm(const SourceSpec& spec, Polarization pol, double center_hz, double fsr_hz, double t_c,
                           int points = 100000) {
  std::vector<double> f(points), y(points);
  double peak = 0.0;
  for (int k = 0; k < points; ++k) {
    f[k] = center_hz - 0.5 * fsr_hz + fsr_hz * k / (points - 1);
    y[k] = std::norm(airy_amplitude(spec, pol, f[k], t_c));
    peak = std::max(peak, y[k]);
  }
  const int mid = points / 2;
  int k = mid;
  while (k > 0 && y[k] > 0.5 * peak) --k;
  const double lo = f[k] + (0.5 * peak - y[k]) / (y[k + 1] - y[k]) * (f[k + 1] - f[k]);
  k = mid;
  while (k < points - 1 && y[k] > 0.5 * peak) ++k;
  const double hi = f[k - 1] + (0.5 * peak - y[k - 1]) / (y[k] - y[k - 1]) * (f[k] - f[k - 1]);
  return hi - lo;
}

}  // namespace respdc::test
