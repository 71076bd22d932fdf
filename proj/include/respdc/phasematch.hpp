#pragma once

#include <optional>

#include "respdc/cavity.hpp"

namespace respdc {

// Energy conservation is structural: the idler frequency is always derived.
class PhasematchPoint {
 public:
  PhasematchPoint(double pump_hz, double signal_hz, double temperature_c, double poling_period_m);
  // Point at the spec's thermally expanded grating period.
  static PhasematchPoint at(const SourceSpec& spec, double pump_hz, double signal_hz, double temperature_c);

  double pump_frequency() const { return pump_; }
  double signal_frequency() const { return signal_; }
  double idler_frequency() const { return pump_ - signal_; }
  double temperature() const { return temperature_; }
  double poling_period() const { return poling_period_; }

 private:
  double pump_;
  double signal_;
  double temperature_;
  double poling_period_;
};

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double phase_mismatch(const SourceSpec& spec, const PhasematchPoint& point);
double pm_amplitude(const SourceSpec& spec, const PhasematchPoint& point);

// Grating period at `temperature_c` giving exact first-order phase matching.
double solve_poling_period(const SourceSpec& spec, double pump_wavelength_m, double signal_wavelength_m,
                           double temperature_c);

struct PhasematchRoots {
  double signal_hz = 0.0;
  int multiplicity = 1;
};

// Signal root of the phase mismatch at fixed pump. With no hint the higher-frequency branch
// (nu_s > nu_p / 2) is preferred; with several roots the one nearest the hint (or with the
// largest group-index contrast when there is no hint) wins and multiplicity reports the count.
PhasematchRoots phasematched_signal_roots(const SourceSpec& spec, double pump_hz, double temperature_c,
                                          std::optional<double> hint_hz = std::nullopt);
double phasematched_signal(const SourceSpec& spec, double pump_hz, double temperature_c,
                           std::optional<double> hint_hz = std::nullopt);

double group_index_difference(const SourceSpec& spec, const PhasematchPoint& point);  // n_g,s - n_g,i
double pm_bandwidth_estimate(const SourceSpec& spec, const PhasematchPoint& point);
double cluster_spacing_estimate(const SourceSpec& spec, const PhasematchPoint& point);

// Exact double resonance nearest the phase-matching peak for a nominal pump: the signal
// resonance nearest the phase-matched signal, then the idler resonance nearest the
// conjugate frequency; the pump is moved (by less than half an idler FSR) to their sum.
PhasematchPoint double_resonance_setpoint(const SourceSpec& spec, double nominal_pump_hz, double temperature_c,
                                          std::optional<double> signal_hint_hz = std::nullopt);

}  // namespace respdc
