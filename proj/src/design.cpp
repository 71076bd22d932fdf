#include "respdc/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "respdc/error.hpp"
#include "respdc/parallel.hpp"

namespace respdc {

namespace {

struct RoleAssignment {
  SourceSpec spec;
  bool swapped = false;
  double memory_hz = 0.0;
  double pump_hz = 0.0;
};

// Source for a memory target: both photons share the mirror pair, the memory photon takes
// the signal role (relabeling when it is the lower-frequency photon) and the grating is
// solved for exact phase matching at the design temperature.
RoleAssignment assign_roles(const MemoryTarget& target, const SourceSpec& base, double length_m, double r2) {
  RoleAssignment a;
  a.memory_hz = kSpeedOfLight / target.signal_wavelength_m;
  a.pump_hz = kSpeedOfLight / target.pump_wavelength_m;
  SourceSpec s = base;
  s.length_m = length_m;
  s.mirrors_signal = {base.mirrors_signal.r1, r2};
  s.mirrors_idler = s.mirrors_signal;
  a.swapped = a.memory_hz < 0.5 * a.pump_hz;
  if (a.swapped) s = s.relabeled();
  s.set_poling_period_at(
      solve_poling_period(s, target.pump_wavelength_m, target.signal_wavelength_m, kDesignTemperatureC),
      kDesignTemperatureC);
  s.validate();
  a.spec = s;
  return a;
}

double memory_linewidth(const RoleAssignment& a) {
  return resonance_linewidth(a.spec, a.spec.signal_polarization, a.memory_hz, kDesignTemperatureC);
}

double cell_mode_excitation(const SourceSpec& spec, const PhasematchPoint& setpoint, const PumpSpec& pump,
                            bool filter) {
  PumpSpec p = pump;
  p.central_frequency = setpoint.pump_frequency();
  const auto [sw, iw] = central_cluster_windows(spec, setpoint, p);
  JointSpectrum js = build_jsa(spec, p, setpoint.temperature(), sw, iw, default_jsa_step(spec, setpoint));
  if (filter) js = apply_cluster_filter(std::move(js), spec);
  return mode_excitation_probability(js);
}

std::vector<double> geometric(double lo, double hi, int steps) {
  std::vector<double> v;
  if (steps <= 1) return {lo};
  for (int k = 0; k < steps; ++k) v.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (steps - 1)));
  return v;
}

}  // namespace

std::vector<double> AxisRange::values() const {
  if (steps <= 1) return {min};
  std::vector<double> v;
  for (int k = 0; k < steps; ++k) v.push_back(min + (max - min) * static_cast<double>(k) / (steps - 1));
  return v;
}

SourceSpec with_geometry(const SourceSpec& base, double length_m, double signal_r2) {
  SourceSpec s = base;
  s.length_m = length_m;
  s.mirrors_signal.r2 = signal_r2;
  s.validate();
  return s;
}

DesignMap bandwidth_map(const SourceSpec& base, double signal_frequency_hz, double temperature_c,
                        const AxisRange& lengths, const AxisRange& reflectivities) {
  DesignMap m;
  m.lengths = lengths.values();
  m.reflectivities = reflectivities.values();
  m.values.assign(m.lengths.size(), std::vector<double>(m.reflectivities.size(), 0.0));
  const std::size_t nc = m.reflectivities.size();
  parallel_for(m.lengths.size() * nc, [&](std::size_t cell) {
    const std::size_t i = cell / nc, j = cell % nc;
    const SourceSpec s = with_geometry(base, m.lengths[i], m.reflectivities[j]);
    m.values[i][j] = resonance_linewidth(s, s.signal_polarization, signal_frequency_hz, temperature_c);
  });
  return m;
}

DesignMap purity_map(const SourceSpec& base, double nominal_pump_hz, double temperature_c, const AxisRange& lengths,
                     const AxisRange& reflectivities, const PumpSpec& pump, const PurityMapOptions& options) {
  DesignMap m;
  m.lengths = lengths.values();
  m.reflectivities = reflectivities.values();
  m.values.assign(m.lengths.size(), std::vector<double>(m.reflectivities.size(), 0.0));
  const std::size_t nc = m.reflectivities.size();
  parallel_for(m.lengths.size() * nc, [&](std::size_t cell) {
    const std::size_t i = cell / nc, j = cell % nc;
    const SourceSpec s = with_geometry(base, m.lengths[i], m.reflectivities[j]);
    const PhasematchPoint sp = double_resonance_setpoint(s, nominal_pump_hz, temperature_c);
    m.values[i][j] = cell_mode_excitation(s, sp, pump, options.cluster_filter);
  });
  return m;
}

void MemoryTarget::validate() const {
  if (!(desired_bandwidth_hz >= 1e6 && desired_bandwidth_hz <= 5e9))
    throw DomainError("target bandwidth must lie in [1 MHz, 5 GHz]");
  if (!(minimum_total_purity >= 0.0 && minimum_total_purity <= 1.0))
    throw DomainError("minimum total purity must lie in [0, 1]");
  if (!(pump_wavelength_m > 0.0 && signal_wavelength_m > pump_wavelength_m))
    throw DomainError("memory wavelength must exceed the pump wavelength");
}

DesignResult evaluate_design(const MemoryTarget& target, const SourceSpec& base, double length_m,
                             double reflectivity_r2, double pump_fwhm_hz) {
  target.validate();
  const double T = kDesignTemperatureC;
  const RoleAssignment roles = assign_roles(target, base, length_m, reflectivity_r2);
  const SourceSpec& spec = roles.spec;
  const PhasematchPoint setpoint = double_resonance_setpoint(spec, roles.pump_hz, T, roles.memory_hz);

  DesignResult r;
  r.target = target;
  r.source = spec;
  r.roles_swapped = roles.swapped;
  r.temperature_c = T;
  r.poling_period_m = spec.poling_period_at(T);
  r.memory_wavelength_m = target.signal_wavelength_m;
  r.idler_wavelength_m = kSpeedOfLight / (roles.pump_hz - roles.memory_hz);
  r.length_m = length_m;
  r.reflectivity_r2 = reflectivity_r2;
  r.pump = {setpoint.pump_frequency(), pump_fwhm_hz, PumpLineshape::Gaussian};
  r.setpoint_pump_hz = setpoint.pump_frequency();
  r.setpoint_signal_hz = setpoint.signal_frequency();
  r.memory_linewidth_hz = resonance_linewidth(spec, spec.signal_polarization, setpoint.signal_frequency(), T);
  r.partner_linewidth_hz = resonance_linewidth(spec, spec.idler_polarization, setpoint.idler_frequency(), T);
  r.purity = setpoint_purity(spec, setpoint, r.pump);
  StabilityOptions so;
  so.signal_hint_hz = setpoint.signal_frequency();
  std::tie(r.pump_stability, r.temperature_stability) = stability_windows(spec, setpoint.pump_frequency(), T, so);
  r.brightness = enhancement_factor(spec, setpoint, T);

  r.notes.push_back("idler mirrors equal to signal mirrors");
  r.notes.push_back("default cluster filter on the heralding photon");
  if (roles.swapped) r.notes.push_back("memory photon is the extraordinary, lower-frequency photon (roles swapped)");
  const bool bandwidth_ok =
      std::abs(r.memory_linewidth_hz / target.desired_bandwidth_hz - 1.0) <= 0.2 + 1e-12;
  const bool purity_ok = r.purity.total_purity >= target.minimum_total_purity;
  r.feasible = bandwidth_ok && purity_ok;
  if (!bandwidth_ok)
    r.binding_constraint = "bandwidth";
  else if (!purity_ok)
    r.binding_constraint = "purity";
  return r;
}

DesignResult design_for_memory(const MemoryTarget& target, const SourceSpec& base, const DesignSearchOptions& options) {
  target.validate();
  const double T = kDesignTemperatureC;
  const double goal = target.desired_bandwidth_hz;
  const std::vector<double> lengths = geometric(options.lengths.min, options.lengths.max, options.lengths.steps);
  const std::vector<double> refl = options.reflectivities.values();

  // (1) coarse linewidth grid.
  struct Cell {
    std::size_t i = 0, j = 0;
    double linewidth = 0.0;
    double m = -1.0;
    double eta = 0.0;
  };
  std::vector<Cell> cells;
  Cell closest;
  double closest_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lengths.size(); ++i)
    for (std::size_t j = 0; j < refl.size(); ++j) {
      const RoleAssignment a = assign_roles(target, base, lengths[i], refl[j]);
      Cell c{i, j, memory_linewidth(a), -1.0, escape_probability(a.spec, T)};
      const double err = std::abs(std::log(c.linewidth / goal));
      if (err < closest_err) {
        closest_err = err;
        closest = c;
      }
      if (std::abs(c.linewidth / goal - 1.0) <= options.bandwidth_tolerance) cells.push_back(c);
    }
  if (cells.empty()) {
    DesignResult r = evaluate_design(target, base, lengths[closest.i], refl[closest.j], 2.0 * closest.linewidth);
    r.feasible = false;
    r.binding_constraint = "bandwidth";
    r.notes.push_back("no (L, R) cell reaches the target bandwidth within tolerance");
    return r;
  }

  // (2) mode-excitation probability of each candidate at a pump twice the linewidth.
  parallel_for(cells.size(), [&](std::size_t k) {
    Cell& c = cells[k];
    const RoleAssignment a = assign_roles(target, base, lengths[c.i], refl[c.j]);
    const PhasematchPoint sp = double_resonance_setpoint(a.spec, a.pump_hz, T, a.memory_hz);
    c.m = cell_mode_excitation(a.spec, sp, {sp.pump_frequency(), 2.0 * c.linewidth, PumpLineshape::Gaussian}, true);
  });
  const Cell best = *std::max_element(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
    if (std::abs(x.m - y.m) > 1e-9) return x.m < y.m;
    return x.eta < y.eta;
  });

  // (3) local refinement in L, with R_2 solved for the exact target linewidth.
  auto solve_r = [&](double length) -> std::optional<double> {
    double lo = 0.01, hi = 0.9995;
    const double lw_lo = memory_linewidth(assign_roles(target, base, length, lo));
    const double lw_hi = memory_linewidth(assign_roles(target, base, length, hi));
    if (!(goal <= lw_lo && goal >= lw_hi)) return std::nullopt;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (memory_linewidth(assign_roles(target, base, length, mid)) > goal)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double l_lo = lengths[best.i > 0 ? best.i - 1 : 0];
  const double l_hi = lengths[std::min(best.i + 1, lengths.size() - 1)];
  double best_l = lengths[best.i], best_r = refl[best.j], best_m = best.m;
  const std::vector<double> trial = geometric(l_lo, l_hi, 7);
  for (double length : trial) {
    const auto r2 = solve_r(length);
    if (!r2) continue;
    const RoleAssignment a = assign_roles(target, base, length, *r2);
    const PhasematchPoint sp = double_resonance_setpoint(a.spec, a.pump_hz, T, a.memory_hz);
    const double m = cell_mode_excitation(a.spec, sp, {sp.pump_frequency(), 2.0 * goal, PumpLineshape::Gaussian}, true);
    if (m > best_m + 1e-9) {
      best_m = m;
      best_l = length;
      best_r = *r2;
    }
  }

  // (4) smallest pump bandwidth meeting the purity target.
  const RoleAssignment a = assign_roles(target, base, best_l, best_r);
  const PhasematchPoint sp = double_resonance_setpoint(a.spec, a.pump_hz, T, a.memory_hz);
  const double gamma = std::min(resonance_linewidth(a.spec, a.spec.signal_polarization, sp.signal_frequency(), T),
                                resonance_linewidth(a.spec, a.spec.idler_polarization, sp.idler_frequency(), T));
  std::vector<double> sigmas;
  for (int j = -4; j <= 8; ++j) sigmas.push_back(gamma * std::pow(2.0, 0.5 * j));
  const PumpBandwidthScan scan = purity_vs_pump_bandwidth(a.spec, sp, sigmas);
  double chosen_sigma = 0.0, chosen_p = -1.0, fallback_sigma = sigmas.back();
  for (const auto& row : scan.rows) {
    if (row.spectral_purity < target.minimum_total_purity) continue;
    const PurityReport pr = setpoint_purity(a.spec, sp, {sp.pump_frequency(), row.sigma, PumpLineshape::Gaussian});
    if (pr.total_purity > chosen_p) {
      chosen_p = pr.total_purity;
      fallback_sigma = row.sigma;
    }
    if (pr.total_purity >= target.minimum_total_purity) {
      chosen_sigma = row.sigma;
      break;
    }
  }
  if (chosen_sigma == 0.0) {
    if (chosen_p < 0.0) {
      // No bandwidth reaches the spectral-purity share; take the most separable pump.
      fallback_sigma = std::max_element(scan.rows.begin(), scan.rows.end(), [](auto& x, auto& y) {
                         return x.spectral_purity < y.spectral_purity;
                       })->sigma;
    }
    chosen_sigma = fallback_sigma;
  }
  DesignResult r = evaluate_design(target, base, best_l, best_r, chosen_sigma);
  r.notes.push_back("search: coarse grid + local refinement; pump bandwidth from the K(sigma_p) scan");
  return r;
}

}  // namespace respdc
