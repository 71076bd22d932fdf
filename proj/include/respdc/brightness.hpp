#pragma once

#include "respdc/phasematch.hpp"

namespace respdc {

struct BrightnessReport {
  double clustering_factor = 0.0;       // N0
  double finesse_signal = 0.0;
  double finesse_idler = 0.0;
  double escape_probability = 0.0;      // eta_pp
  double enhancement_proportional = 0.0;  // N0 F_s F_i eta_pp
  // Spectral density per signal linewidth in the dominant resonance relative to the
  // non-resonant density per phase-matching bandwidth.
  double relative_spectral_brightness = 0.0;
  double redistribution_ratio = 0.0;    // pm_bandwidth_estimate / signal linewidth
  double resonant_rate_ratio = 0.0;     // rate in the dominant resonance / non-resonant rate
  bool degenerate = false;              // no resonant enhancement (a finesse is zero)
};

double clustering_factor(const SourceSpec& spec, const PhasematchPoint& point);
// Probability that a photon of one polarization leaves through the output facet.
double escape_probability(const SourceSpec& spec, Polarization pol, double temperature_c);
double escape_probability(const SourceSpec& spec, double temperature_c);
// Output-coupled spectral density of one photon relative to single pass:
// eta (1 - rho^2) / |1 - rho e^{i phi}|^2, whose average over one FSR equals eta.
double output_spectral_factor(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);

BrightnessReport enhancement_factor(const SourceSpec& spec, const PhasematchPoint& point, double temperature_c);
double spectral_brightness_estimate(const SourceSpec& spec, const PhasematchPoint& point, double temperature_c,
                                    double reference_brightness);

}  // namespace respdc
