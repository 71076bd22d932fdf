#include "respdc/cavity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "respdc/error.hpp"

namespace respdc {

namespace {

std::string hz_text(double hz) {
  std::ostringstream os;
  os.precision(12);
  os << hz << " Hz";
  return os.str();
}

// Safeguarded Newton on phi(nu) = target inside [a, b] with phi(a) <= target <= phi(b).
double solve_phase(const SourceSpec& spec, Polarization pol, double target, double a, double b, double T) {
  double x = 0.5 * (a + b);
  for (int it = 0; it < 50; ++it) {
    const double r = roundtrip_phase(spec, pol, x, T) - target;
    if (std::abs(r) < 1e-9) return x;
    if (r > 0.0) b = x; else a = x;
    double next = x - r / roundtrip_phase_slope(spec, pol, x, T);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) < 1e-7 && std::abs(r) < 1e-6) return next;
    x = next;
  }
  const double r = roundtrip_phase(spec, pol, x, T) - target;
  if (std::abs(r) < 1e-6) return x;
  throw ConvergenceError("resonance Newton iteration did not converge in bracket [" + hz_text(a) + ", " + hz_text(b) +
                         "]");
}

}  // namespace

void MirrorPair::validate(const char* label) const {
  for (double r : {r1, r2})
    if (!(r >= 0.0 && r < 1.0))
      throw DomainError(std::string(label) + " mirror reflectivity must lie in [0, 1)");
}

void SourceSpec::validate() const {
  if (!(length_m > 0.0)) throw DomainError("length must be positive");
  if (!(poling_period_m > 0.0)) throw DomainError("poling period must be positive");
  if (!(loss_signal_db_per_cm >= 0.0) || !(loss_idler_db_per_cm >= 0.0))
    throw DomainError("losses must be non-negative");
  if (!(thermal.expansion_coefficient > 0.0)) throw DomainError("expansion coefficient must be positive");
  if (signal_polarization == idler_polarization)
    throw DomainError("signal and idler must have different polarizations");
  mirrors_signal.validate("signal");
  mirrors_idler.validate("idler");
}

double SourceSpec::length_at(double temperature_c) const { return sample_length(thermal, length_m, temperature_c); }

double SourceSpec::poling_period_at(double temperature_c) const {
  return poling_period_m * thermal.length_factor(temperature_c);
}

void SourceSpec::set_poling_period_at(double period_m, double temperature_c) {
  poling_period_m = period_m / thermal.length_factor(temperature_c);
}

const MirrorPair& SourceSpec::mirrors(Polarization pol) const {
  return pol == signal_polarization ? mirrors_signal : mirrors_idler;
}

double SourceSpec::loss_db_per_cm(Polarization pol) const {
  return pol == signal_polarization ? loss_signal_db_per_cm : loss_idler_db_per_cm;
}

double SourceSpec::attenuation_per_m(Polarization pol) const {
  return attenuation_from_db_per_cm(loss_db_per_cm(pol));
}

SourceSpec SourceSpec::relabeled() const {
  SourceSpec s = *this;
  std::swap(s.mirrors_signal, s.mirrors_idler);
  std::swap(s.loss_signal_db_per_cm, s.loss_idler_db_per_cm);
  std::swap(s.signal_polarization, s.idler_polarization);
  return s;
}

double attenuation_from_db_per_cm(double db_per_cm) { return db_per_cm * std::log(10.0) / 10.0 * 100.0; }

double roundtrip_factor(const SourceSpec& spec, Polarization pol, double temperature_c) {
  const MirrorPair& m = spec.mirrors(pol);
  return std::sqrt(m.r1 * m.r2) * std::exp(-spec.attenuation_per_m(pol) * spec.length_at(temperature_c));
}

CavityResponse cavity_response(const SourceSpec& spec, Polarization pol, double temperature_c) {
  const MirrorPair& m = spec.mirrors(pol);
  CavityResponse r;
  r.length_m = spec.length_at(temperature_c);
  const double alpha = spec.attenuation_per_m(pol);
  r.prefactor = std::sqrt((1.0 - m.r1) * (1.0 - m.r2)) * std::exp(-0.5 * alpha * r.length_m);
  r.rho = std::sqrt(m.r1 * m.r2) * std::exp(-alpha * r.length_m);
  return r;
}

double roundtrip_phase(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be positive");
  const double n = refractive_index(spec.dispersion, pol, kSpeedOfLight / frequency_hz, temperature_c);
  return 2.0 * kTwoPi * frequency_hz * n * spec.length_at(temperature_c) / kSpeedOfLight;
}

double roundtrip_phase_slope(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  const double ng = group_index(spec.dispersion, pol, kSpeedOfLight / frequency_hz, temperature_c);
  return 2.0 * kTwoPi * ng * spec.length_at(temperature_c) / kSpeedOfLight;
}

std::complex<double> airy_amplitude(const SourceSpec& spec, Polarization pol, double frequency_hz,
                                    double temperature_c) {
  return cavity_response(spec, pol, temperature_c).at_phase(roundtrip_phase(spec, pol, frequency_hz, temperature_c));
}

double free_spectral_range(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be positive");
  const double ng = group_index(spec.dispersion, pol, kSpeedOfLight / frequency_hz, temperature_c);
  return kSpeedOfLight / (2.0 * ng * spec.length_at(temperature_c));
}

double finesse(const SourceSpec& spec, Polarization pol, double temperature_c) {
  spec.mirrors(pol).validate(pol == spec.signal_polarization ? "signal" : "idler");
  const double rho = roundtrip_factor(spec, pol, temperature_c);
  return kPi * std::sqrt(rho) / (1.0 - rho);
}

double resonance_linewidth(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  const double f = finesse(spec, pol, temperature_c);
  if (!(f > 0.0)) throw DomainError("degenerate cavity: finesse is zero, linewidth undefined");
  return free_spectral_range(spec, pol, frequency_hz, temperature_c) / f;
}

double guard_linewidth(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  if (finesse(spec, pol, temperature_c) == 0.0) return std::numeric_limits<double>::infinity();
  return resonance_linewidth(spec, pol, frequency_hz, temperature_c);
}

ResonanceComb find_resonances(const SourceSpec& spec, Polarization pol, Interval window, double temperature_c) {
  const double fsr = free_spectral_range(spec, pol, window.center(), temperature_c);
  if (!(window.width() >= fsr))
    throw DomainError("resonance search window narrower than one free spectral range");
  ResonanceComb comb;
  comb.polarization = pol;
  comb.fsr = fsr;
  comb.finesse = finesse(spec, pol, temperature_c);
  comb.linewidth_fwhm = comb.finesse > 0.0 ? fsr / comb.finesse : 0.0;

  const double seed_step = fsr / 8.0;
  const auto n_seeds = static_cast<long long>(std::ceil(window.width() / seed_step));
  double a = window.lo;
  double phi_a = roundtrip_phase(spec, pol, a, temperature_c);
  for (long long k = 1; k <= n_seeds; ++k) {
    const double b = std::min(window.hi, window.lo + static_cast<double>(k) * seed_step);
    const double phi_b = roundtrip_phase(spec, pol, b, temperature_c);
    // Orders m with phi_a < 2 pi m <= phi_b (the window's lower edge is covered by the first bracket).
    long long m_lo = static_cast<long long>(std::floor(phi_a / kTwoPi)) + 1;
    if (k == 1 && std::fmod(phi_a, kTwoPi) == 0.0) m_lo -= 1;
    const auto m_hi = static_cast<long long>(std::floor(phi_b / kTwoPi));
    for (long long m = m_lo; m <= m_hi; ++m) {
      const double nu = solve_phase(spec, pol, kTwoPi * static_cast<double>(m), a, b, temperature_c);
      comb.centers.push_back(nu);
      comb.orders.push_back(m);
    }
    a = b;
    phi_a = phi_b;
  }
  return comb;
}

double resonance_of_order(const SourceSpec& spec, Polarization pol, long long order, double guess_hz,
                          double temperature_c) {
  const double target = kTwoPi * static_cast<double>(order);
  const double fsr = free_spectral_range(spec, pol, guess_hz, temperature_c);
  double a = guess_hz - fsr, b = guess_hz + fsr;
  for (int expand = 0; expand < 20; ++expand) {
    if (roundtrip_phase(spec, pol, a, temperature_c) <= target && roundtrip_phase(spec, pol, b, temperature_c) >= target)
      return solve_phase(spec, pol, target, a, b, temperature_c);
    a -= fsr;
    b += fsr;
  }
  throw ConvergenceError("could not bracket resonance order " + std::to_string(order) + " near " + hz_text(guess_hz));
}

double nearest_resonance(const SourceSpec& spec, Polarization pol, double frequency_hz, double temperature_c) {
  const long long m = std::llround(roundtrip_phase(spec, pol, frequency_hz, temperature_c) / kTwoPi);
  return resonance_of_order(spec, pol, m, frequency_hz, temperature_c);
}

}  // namespace respdc
