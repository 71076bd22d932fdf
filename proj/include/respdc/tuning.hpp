#pragma once

#include <vector>

#include "respdc/phasematch.hpp"

namespace respdc {

struct CotuningCoefficients {
  double dT_dnu_s = 0.0;     // K/Hz
  double dnu_p_dnu_s = 0.0;  // dimensionless

  double dT_dnu_s_c_per_ghz() const { return dT_dnu_s * 1e9; }
};

struct PhasePartials {
  double dphi_domega = 0.0;  // s
  double dphi_dT = 0.0;      // rad/K
};

struct TuningEntry {
  double signal_offset = 0.0;   // Hz
  double temperature = 0.0;     // C
  double pump_frequency = 0.0;  // Hz
  double residual_phase_s = 0.0;  // rad, signed distance to the nearest 2 pi multiple
  double residual_phase_i = 0.0;
  double predicted_temperature = 0.0;     // first-order Taylor prediction from the setpoint
  double predicted_pump_frequency = 0.0;
  double dominant_peak = 0.0;   // Hz, from the verification spectrum (0 when not verified)
};

struct TuningSchedule {
  PhasematchPoint setpoint;
  CotuningCoefficients coefficients;
  std::vector<TuningEntry> entries;
};

struct FineTuneOptions {
  bool verify_spectrum = true;
  double residual_tolerance = 1e-4;  // rad
};

// Step scale multiplies the default steps (linewidth / 10 and 1 mK).
PhasePartials phase_partials(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c,
                             double step_scale = 1.0);
CotuningCoefficients cotuning_coefficients(const SourceSpec& spec, const PhasematchPoint& point,
                                           double temperature_c);
// Signed residual of the round-trip phase with respect to the nearest multiple of 2 pi.
double phase_residual(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);

// `point` must be an exact double resonance (see double_resonance_setpoint).
TuningSchedule fine_tune_schedule(const SourceSpec& spec, const PhasematchPoint& point, double temperature_c,
                                  const std::vector<double>& signal_offsets, const FineTuneOptions& options = {});

}  // namespace respdc
