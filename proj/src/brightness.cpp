#include "respdc/brightness.hpp"

#include <algorithm>
#include <cmath>

#include "respdc/error.hpp"

namespace respdc {

double clustering_factor(const SourceSpec& spec, const PhasematchPoint& point) {
  const double T = point.temperature();
  const double ngs =
      group_index(spec.dispersion, spec.signal_polarization, kSpeedOfLight / point.signal_frequency(), T);
  return 2.0 * ngs * spec.length_at(T) * cluster_spacing_estimate(spec, point) / kSpeedOfLight;
}

double escape_probability(const SourceSpec& spec, Polarization pol, double temperature_c) {
  const MirrorPair& m = spec.mirrors(pol);
  m.validate(pol == spec.signal_polarization ? "signal" : "idler");
  const double loss = std::exp(-2.0 * spec.attenuation_per_m(pol) * spec.length_at(temperature_c));
  return (1.0 - m.r2) / (1.0 - m.r1 * m.r2 * loss);
}

double escape_probability(const SourceSpec& spec, double temperature_c) {
  return escape_probability(spec, spec.signal_polarization, temperature_c) *
         escape_probability(spec, spec.idler_polarization, temperature_c);
}

double output_spectral_factor(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  const double rho = roundtrip_factor(spec, pol, temperature_c);
  const double eta = escape_probability(spec, pol, temperature_c);
  const double phi = roundtrip_phase(spec, pol, frequency_hz, temperature_c);
  return eta * (1.0 - rho * rho) / (1.0 - 2.0 * rho * std::cos(phi) + rho * rho);
}

BrightnessReport enhancement_factor(const SourceSpec& spec, const PhasematchPoint& point, double temperature_c) {
  const double T = temperature_c;
  const PhasematchPoint pt = PhasematchPoint::at(spec, point.pump_frequency(), point.signal_frequency(), T);
  BrightnessReport r;
  r.clustering_factor = clustering_factor(spec, pt);
  r.finesse_signal = finesse(spec, spec.signal_polarization, T);
  r.finesse_idler = finesse(spec, spec.idler_polarization, T);
  r.escape_probability = escape_probability(spec, T);
  r.enhancement_proportional = r.clustering_factor * r.finesse_signal * r.finesse_idler * r.escape_probability;
  if (r.finesse_signal == 0.0 || r.finesse_idler == 0.0) {
    r.degenerate = true;
    return r;
  }

  const Polarization sp = spec.signal_polarization, ip = spec.idler_polarization;
  const double nu_p = pt.pump_frequency();
  const double center = nearest_resonance(spec, sp, pt.signal_frequency(), T);
  const double fsr = free_spectral_range(spec, sp, center, T);
  const double gamma_s = fsr / r.finesse_signal;
  const double gamma_i = resonance_linewidth(spec, ip, nu_p - center, T);
  const double length = spec.length_at(T);
  const double grating = kTwoPi / spec.poling_period_at(T);
  const double beta_p = propagation_constant(spec.dispersion, spec.pump_polarization, nu_p, T);

  // Rate in the dominant resonance: integrate over its signal Voronoi cell (one FSR).
  const double step = std::min(gamma_s, gamma_i) / 40.0;
  const auto n = static_cast<long long>(std::ceil(fsr / step));
  const double h = fsr / static_cast<double>(n);
  double resonant = 0.0;
  for (long long k = 0; k <= n; ++k) {
    const double nu = center - 0.5 * fsr + h * static_cast<double>(k);
    const double dbeta = beta_p - propagation_constant(spec.dispersion, sp, nu, T) -
                         propagation_constant(spec.dispersion, ip, nu_p - nu, T) - grating;
    const double pm = sinc(0.5 * dbeta * length);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    resonant += w * h * pm * pm * output_spectral_factor(spec, sp, nu, T) * output_spectral_factor(spec, ip, nu_p - nu, T);
  }
  // Non-resonant rate: integral of sinc^2 over the linearized envelope, c / (L |dn_g|) = 2 dnu_c.
  const double nonresonant = 2.0 * cluster_spacing_estimate(spec, pt);
  const double pm_bandwidth = pm_bandwidth_estimate(spec, pt);
  r.resonant_rate_ratio = resonant / nonresonant;
  r.redistribution_ratio = pm_bandwidth / gamma_s;
  r.relative_spectral_brightness = r.resonant_rate_ratio * r.redistribution_ratio;
  return r;
}

double spectral_brightness_estimate(const SourceSpec& spec, const PhasematchPoint& point, double temperature_c,
                                    double reference_brightness) {
  if (!(reference_brightness > 0.0)) throw DomainError("reference brightness must be positive");
  return reference_brightness * enhancement_factor(spec, point, temperature_c).relative_spectral_brightness;
}

}  // namespace respdc
