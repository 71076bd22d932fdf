#include "respdc/phasematch.hpp"

#include <cmath>
#include <iostream>
#include <vector>

#include "respdc/error.hpp"

namespace respdc {

namespace {

double mismatch_at(const SourceSpec& spec, double pump, double signal, double T, double period) {
  const double bp = propagation_constant(spec.dispersion, spec.pump_polarization, pump, T);
  const double bs = propagation_constant(spec.dispersion, spec.signal_polarization, signal, T);
  const double bi = propagation_constant(spec.dispersion, spec.idler_polarization, pump - signal, T);
  return bp - bs - bi - kTwoPi / period;
}

bool in_range(const SourceSpec& spec, Polarization pol, double frequency) {
  const auto& c = spec.dispersion.coefficients(pol);
  const double lam = kSpeedOfLight / frequency;
  return lam > c.wavelength_min_m * (1 + 1e-6) && lam < c.wavelength_max_m * (1 - 1e-6);
}

}  // namespace

PhasematchPoint::PhasematchPoint(double pump_hz, double signal_hz, double temperature_c, double poling_period_m)
    : pump_(pump_hz), signal_(signal_hz), temperature_(temperature_c), poling_period_(poling_period_m) {
  if (!(pump_hz > 0.0 && signal_hz > 0.0 && signal_hz < pump_hz))
    throw DomainError("phase-matching point needs 0 < signal < pump frequency");
  if (!(poling_period_m > 0.0)) throw DomainError("poling period must be positive");
}

PhasematchPoint PhasematchPoint::at(const SourceSpec& spec, double pump_hz, double signal_hz, double temperature_c) {
  return PhasematchPoint(pump_hz, signal_hz, temperature_c, spec.poling_period_at(temperature_c));
}

double phase_mismatch(const SourceSpec& spec, const PhasematchPoint& p) {
  return mismatch_at(spec, p.pump_frequency(), p.signal_frequency(), p.temperature(), p.poling_period());
}

double pm_amplitude(const SourceSpec& spec, const PhasematchPoint& p) {
  return sinc(0.5 * phase_mismatch(spec, p) * spec.length_at(p.temperature()));
}

double solve_poling_period(const SourceSpec& spec, double pump_wavelength_m, double signal_wavelength_m,
                           double temperature_c) {
  const double nu_p = kSpeedOfLight / pump_wavelength_m;
  const double nu_s = kSpeedOfLight / signal_wavelength_m;
  if (!(nu_s < nu_p)) throw DomainError("signal wavelength must exceed pump wavelength");
  const double bp = propagation_constant(spec.dispersion, spec.pump_polarization, nu_p, temperature_c);
  const double bs = propagation_constant(spec.dispersion, spec.signal_polarization, nu_s, temperature_c);
  const double bi = propagation_constant(spec.dispersion, spec.idler_polarization, nu_p - nu_s, temperature_c);
  const double denom = bp - bs - bi;
  if (!(denom > 0.0)) throw DomainError("process not quasi-phasematchable with first-order grating");
  return kTwoPi / denom;
}

PhasematchRoots phasematched_signal_roots(const SourceSpec& spec, double pump_hz, double temperature_c,
                                          std::optional<double> hint_hz) {
  const double period = spec.poling_period_at(temperature_c);
  auto f = [&](double s) { return mismatch_at(spec, pump_hz, s, temperature_c, period); };

  // Scan [nu_p/4, 3 nu_p/4] restricted to where both photons lie inside the dispersion data.
  const int n_scan = 4000;
  const double lo = 0.25 * pump_hz, hi = 0.75 * pump_hz;
  std::vector<std::pair<double, double>> brackets;
  double prev_x = 0.0, prev_f = 0.0;
  bool have_prev = false;
  for (int k = 0; k <= n_scan; ++k) {
    const double x = lo + (hi - lo) * k / n_scan;
    if (!in_range(spec, spec.signal_polarization, x) || !in_range(spec, spec.idler_polarization, pump_hz - x)) {
      have_prev = false;
      continue;
    }
    const double fx = f(x);
    if (have_prev && ((prev_f < 0.0) != (fx < 0.0))) brackets.emplace_back(prev_x, x);
    prev_x = x;
    prev_f = fx;
    have_prev = true;
  }
  if (brackets.empty()) throw DomainError("no phase-matching root in the signal search window");

  std::vector<double> roots;
  for (auto [a, b] : brackets) {
    double fa = f(a);
    // Bisection to a tight bracket, then Newton polish.
    for (int it = 0; it < 200 && (b - a) > 1e3; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    double x = 0.5 * (a + b);
    for (int it = 0; it < 20; ++it) {
      const double fx = f(x);
      if (std::abs(fx) < 1e-6) break;
      const double h = 1e6;
      const double d = (f(x + h) - f(x - h)) / (2 * h);
      if (d == 0.0) break;
      x -= fx / d;
    }
    if (!(std::abs(f(x)) < 1e-3)) throw ConvergenceError("phase-matching Newton polish failed");
    roots.push_back(x);
  }

  PhasematchRoots out;
  std::vector<double> branch;
  for (double r : roots)
    if (hint_hz || r > 0.5 * pump_hz) branch.push_back(r);
  if (branch.empty()) branch = roots;
  out.multiplicity = static_cast<int>(branch.size());
  if (branch.size() == 1) {
    out.signal_hz = branch.front();
  } else if (hint_hz) {
    out.signal_hz = branch.front();
    for (double r : branch)
      if (std::abs(r - *hint_hz) < std::abs(out.signal_hz - *hint_hz)) out.signal_hz = r;
  } else {
    // Highest peak amplitude of the sinc envelope is 1 for every root; the broadest
    // envelope (smallest group-index contrast) carries the largest integrated amplitude.
    double best = -1.0;
    for (double r : branch) {
      const double dng = std::abs(group_index_difference(spec, PhasematchPoint(pump_hz, r, temperature_c, period)));
      const double score = 1.0 / dng;
      if (score > best) {
        best = score;
        out.signal_hz = r;
      }
    }
  }
  return out;
}

double phasematched_signal(const SourceSpec& spec, double pump_hz, double temperature_c, std::optional<double> hint_hz) {
  PhasematchRoots r = phasematched_signal_roots(spec, pump_hz, temperature_c, hint_hz);
  if (r.multiplicity > 1)
    std::cerr << "warning: " << r.multiplicity << " phase-matching roots on the signal branch\n";
  return r.signal_hz;
}

double group_index_difference(const SourceSpec& spec, const PhasematchPoint& p) {
  const double ngs =
      group_index(spec.dispersion, spec.signal_polarization, kSpeedOfLight / p.signal_frequency(), p.temperature());
  const double ngi =
      group_index(spec.dispersion, spec.idler_polarization, kSpeedOfLight / p.idler_frequency(), p.temperature());
  return ngs - ngi;
}

double pm_bandwidth_estimate(const SourceSpec& spec, const PhasematchPoint& p) {
  const double dng = std::abs(group_index_difference(spec, p));
  if (dng < 1e-12) throw DomainError("estimate invalid at group-velocity matching");
  return 5.56 * kSpeedOfLight / (kTwoPi * spec.length_at(p.temperature())) / dng;
}

double cluster_spacing_estimate(const SourceSpec& spec, const PhasematchPoint& p) {
  const double dng = std::abs(group_index_difference(spec, p));
  if (dng < 1e-12) throw DomainError("estimate invalid at group-velocity matching");
  return kSpeedOfLight / (2.0 * spec.length_at(p.temperature())) / dng;
}

PhasematchPoint double_resonance_setpoint(const SourceSpec& spec, double nominal_pump_hz, double temperature_c,
                                          std::optional<double> signal_hint_hz) {
  const double nu_pm = phasematched_signal(spec, nominal_pump_hz, temperature_c, signal_hint_hz);
  const double nu_s = nearest_resonance(spec, spec.signal_polarization, nu_pm, temperature_c);
  const double nu_i = nearest_resonance(spec, spec.idler_polarization, nominal_pump_hz - nu_s, temperature_c);
  return PhasematchPoint::at(spec, nu_s + nu_i, nu_s, temperature_c);
}

}  // namespace respdc
