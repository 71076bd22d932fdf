#pragma once

#include <complex>
#include <vector>

#include "respdc/dispersion.hpp"
#include "respdc/units.hpp"

namespace respdc {

struct MirrorPair {
  double r1 = 0.0;  // input facet power reflectivity
  double r2 = 0.0;  // output facet power reflectivity

  void validate(const char* label) const;
};

// One monolithic resonant waveguide source. Role -> polarization is explicit so that
// signal and idler can be relabeled without touching the physics code.
struct SourceSpec {
  double length_m = 12.3e-3;         // at the reference temperature
  double poling_period_m = 4.5e-6;   // at the reference temperature
  MirrorPair mirrors_signal{0.99, 0.98};
  MirrorPair mirrors_idler{0.99, 0.98};
  double loss_signal_db_per_cm = 0.016;
  double loss_idler_db_per_cm = 0.022;
  Polarization pump_polarization = Polarization::Ordinary;
  Polarization signal_polarization = Polarization::Ordinary;
  Polarization idler_polarization = Polarization::Extraordinary;
  DispersionModel dispersion;
  ThermalModel thermal;

  double reference_temperature_c() const { return thermal.reference_temperature_c; }
  void validate() const;

  double length_at(double temperature_c) const;
  double poling_period_at(double temperature_c) const;
  // Stores a period that is valid at `temperature_c`, converting back to the reference temperature.
  void set_poling_period_at(double period_m, double temperature_c);

  const MirrorPair& mirrors(Polarization pol) const;
  double loss_db_per_cm(Polarization pol) const;
  double attenuation_per_m(Polarization pol) const;

  // Swaps every signal parameter with its idler counterpart.
  SourceSpec relabeled() const;
};

// Power attenuation coefficient in 1/m from a dB/cm figure.
double attenuation_from_db_per_cm(double db_per_cm);

// Round-trip field factor rho = sqrt(R1 R2) exp(-alpha L).
double roundtrip_factor(const SourceSpec& spec, Polarization pol, double temperature_c);

// Cached Airy response for repeated evaluation at fixed temperature.
struct CavityResponse {
  double prefactor = 1.0;  // sqrt((1-R1)(1-R2)) exp(-alpha L / 2)
  double rho = 0.0;
  double length_m = 0.0;

  std::complex<double> at_phase(double phase) const {
    return prefactor / (1.0 - rho * std::polar(1.0, phase));
  }
  double intensity_at_phase(double phase) const {
    // |1 - rho e^{i phi}|^2 = 1 - 2 rho cos(phi) + rho^2
    return prefactor * prefactor / (1.0 - 2.0 * rho * std::cos(phase) + rho * rho);
  }
};
CavityResponse cavity_response(const SourceSpec& spec, Polarization pol, double temperature_c);

double roundtrip_phase(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);
// d(phi)/d(nu) = 4 pi n_g L / c, in rad/Hz.
double roundtrip_phase_slope(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);

std::complex<double> airy_amplitude(const SourceSpec& spec, Polarization pol, double frequency_hz,
                                    double temperature_c);
double free_spectral_range(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);
double finesse(const SourceSpec& spec, Polarization pol, double temperature_c);
double resonance_linewidth(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);
// Linewidth seen by sampling guards: infinite for a cavity without feedback (finesse 0).
double guard_linewidth(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);

struct ResonanceComb {
  Polarization polarization = Polarization::Ordinary;
  std::vector<double> centers;      // Hz, strictly increasing
  std::vector<long long> orders;    // round-trip phase / 2 pi at each center
  double fsr = 0.0;
  double linewidth_fwhm = 0.0;
  double finesse = 0.0;
};

ResonanceComb find_resonances(const SourceSpec& spec, Polarization pol, Interval window, double temperature_c);

// Resonance of integer order nearest in phase to `frequency_hz`.
double nearest_resonance(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c);
// Frequency with round-trip phase exactly 2 pi * order, seeded at `guess_hz`.
double resonance_of_order(const SourceSpec& spec, Polarization pol, long long order, double guess_hz,
                          double temperature_c);

}  // namespace respdc
