#include "respdc/tuning.hpp"

#include <cmath>
#include <sstream>

#include "respdc/error.hpp"
#include "respdc/spectrum.hpp"

namespace respdc {

namespace {

std::string ghz_text(double hz) {
  std::ostringstream os;
  os.precision(6);
  os << hz / 1e9 << " GHz";
  return os.str();
}

double dphi_dT(const SourceSpec& spec, Polarization pol, double nu, double T, double step) {
  return (roundtrip_phase(spec, pol, nu, T + step) - roundtrip_phase(spec, pol, nu, T - step)) / (2.0 * step);
}

}  // namespace

PhasePartials phase_partials(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c,
                             double step_scale) {
  const double dnu = step_scale * resonance_linewidth(spec, pol, frequency_hz, temperature_c) / 10.0;
  const double dT = step_scale * 1e-3;
  PhasePartials p;
  p.dphi_domega = (roundtrip_phase(spec, pol, frequency_hz + dnu, temperature_c) -
                   roundtrip_phase(spec, pol, frequency_hz - dnu, temperature_c)) /
                  (2.0 * kTwoPi * dnu);
  p.dphi_dT = dphi_dT(spec, pol, frequency_hz, temperature_c, dT);
  return p;
}

CotuningCoefficients cotuning_coefficients(const SourceSpec& spec, const PhasematchPoint& point,
                                           double temperature_c) {
  const PhasePartials s = phase_partials(spec, spec.signal_polarization, point.signal_frequency(), temperature_c);
  const PhasePartials i = phase_partials(spec, spec.idler_polarization, point.idler_frequency(), temperature_c);
  const double tiny = 1e-12;
  if (std::abs(s.dphi_dT) < tiny || std::abs(i.dphi_dT) < tiny)
    throw DomainError("singular tuning: round-trip phase does not depend on temperature");
  if (std::abs(s.dphi_domega) < tiny || std::abs(i.dphi_domega) < tiny)
    throw DomainError("singular tuning: round-trip phase does not depend on frequency");
  CotuningCoefficients c;
  c.dT_dnu_s = -(s.dphi_domega / s.dphi_dT) * kTwoPi;
  c.dnu_p_dnu_s = 1.0 + (i.dphi_dT * s.dphi_domega) / (i.dphi_domega * s.dphi_dT);
  return c;
}

double phase_residual(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  const double phi = roundtrip_phase(spec, pol, frequency_hz, temperature_c);
  return phi - kTwoPi * std::round(phi / kTwoPi);
}

TuningSchedule fine_tune_schedule(const SourceSpec& spec, const PhasematchPoint& point, double temperature_c,
                                  const std::vector<double>& signal_offsets, const FineTuneOptions& options) {
  const Polarization sp = spec.signal_polarization, ip = spec.idler_polarization;
  const double T0 = temperature_c;
  const double nu_s0 = point.signal_frequency();
  const double nu_p0 = point.pump_frequency();
  const double rs0 = phase_residual(spec, sp, nu_s0, T0);
  const double ri0 = phase_residual(spec, ip, point.idler_frequency(), T0);
  if (std::abs(rs0) > options.residual_tolerance || std::abs(ri0) > options.residual_tolerance)
    throw DomainError("fine-tune setpoint is not doubly resonant");
  const double order_s = std::round(roundtrip_phase(spec, sp, nu_s0, T0) / kTwoPi);
  const double order_i = std::round(roundtrip_phase(spec, ip, point.idler_frequency(), T0) / kTwoPi);
  const double fsr_s = free_spectral_range(spec, sp, nu_s0, T0);

  TuningSchedule schedule{PhasematchPoint::at(spec, nu_p0, nu_s0, T0), cotuning_coefficients(spec, point, T0), {}};
  const CotuningCoefficients& c = schedule.coefficients;

  double window_half = 0.0;
  long long points = 0;
  if (options.verify_spectrum) {
    window_half = 0.5 * cluster_spacing_estimate(spec, point);
    points = required_spectrum_points(spec, T0, Interval::around(nu_s0, window_half));
  }

  double prev_offset = 0.0, prev_T = T0, prev_p = nu_p0;
  for (double offset : signal_offsets) {
    if (std::abs(offset) > fsr_s * (1.0 + 1e-12))
      throw DomainError("signal offset " + ghz_text(offset) + " exceeds one signal FSR");
    const double nu_s = nu_s0 + offset;
    TuningEntry e;
    e.signal_offset = offset;
    e.predicted_temperature = T0 + c.dT_dnu_s * offset;
    e.predicted_pump_frequency = nu_p0 + c.dnu_p_dnu_s * offset;
    // Seed from the previous entry plus the first-order increment.
    double T = prev_T + c.dT_dnu_s * (offset - prev_offset);
    double nu_p = prev_p + c.dnu_p_dnu_s * (offset - prev_offset);
    if (offset == 0.0) {
      T = T0;
      nu_p = nu_p0;
    }
    double rs = 0.0, ri = 0.0;
    bool converged = false;
    for (int it = 0; it < 40; ++it) {
      rs = roundtrip_phase(spec, sp, nu_s, T) - kTwoPi * order_s;
      ri = roundtrip_phase(spec, ip, nu_p - nu_s, T) - kTwoPi * order_i;
      if (std::abs(rs) < 1e-9 && std::abs(ri) < 1e-9) {
        converged = true;
        break;
      }
      // Triangular Jacobian: the signal residual depends on T only.
      const double js_T = dphi_dT(spec, sp, nu_s, T, 1e-4);
      const double ji_T = dphi_dT(spec, ip, nu_p - nu_s, T, 1e-4);
      const double ji_nu = roundtrip_phase_slope(spec, ip, nu_p - nu_s, T);
      const double dT = -rs / js_T;
      const double dnu = -(ri + ji_T * dT) / ji_nu;
      T += dT;
      nu_p += dnu;
      if (!std::isfinite(T) || !std::isfinite(nu_p)) break;
      if (std::abs(dT) < 1e-13 && std::abs(dnu) < 1e-4) {
        rs = roundtrip_phase(spec, sp, nu_s, T) - kTwoPi * order_s;
        ri = roundtrip_phase(spec, ip, nu_p - nu_s, T) - kTwoPi * order_i;
        converged = std::abs(rs) < options.residual_tolerance && std::abs(ri) < options.residual_tolerance;
        break;
      }
    }
    if (!converged) throw ConvergenceError("fine-tune Newton correction diverged at signal offset " + ghz_text(offset));
    e.temperature = T;
    e.pump_frequency = nu_p;
    e.residual_phase_s = rs;
    e.residual_phase_i = ri;
    if (options.verify_spectrum) {
      const SignalSpectrum s = signal_spectrum(spec, nu_p, T, Interval::around(nu_s, window_half), points);
      e.dominant_peak = dominant_peak(s);
      if (std::abs(e.dominant_peak - nu_s) >= 0.5 * fsr_s)
        throw DomainError("mode hop detected at signal offset " + ghz_text(offset));
    }
    schedule.entries.push_back(e);
    prev_offset = offset;
    prev_T = T;
    prev_p = nu_p;
  }
  return schedule;
}

}  // namespace respdc
