#include "respdc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "respdc/error.hpp"
#include "respdc/parallel.hpp"

namespace respdc {

namespace {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t b, std::size_t e) {
  const double n = static_cast<double>(e - b);
  double mx = 0, my = 0;
  for (std::size_t k = b; k < e; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = b; k < e; ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

PeakTrack track(const std::vector<double>& abscissa, const std::function<SignalSpectrum(double)>& spectrum_at,
                double fsr) {
  PeakTrack t;
  t.abscissa = abscissa;
  t.centers.assign(abscissa.size(), 0.0);
  parallel_for(abscissa.size(), [&](std::size_t k) { t.centers[k] = dominant_peak(spectrum_at(abscissa[k])); });
  std::size_t seg_begin = 0;
  auto close_segment = [&](std::size_t end) {
    if (end - seg_begin >= 2) t.drift_slopes.push_back(least_squares_slope(t.abscissa, t.centers, seg_begin, end));
  };
  for (std::size_t k = 1; k < t.centers.size(); ++k) {
    if (std::abs(t.centers[k] - t.centers[k - 1]) >= 0.5 * fsr) {
      t.hops.push_back(k);
      close_segment(k);
      seg_begin = k;
    }
  }
  close_segment(t.centers.size());
  if (t.centers.size() >= 2) t.overall_slope = least_squares_slope(t.abscissa, t.centers, 0, t.centers.size());
  return t;
}

void require_sorted(const std::vector<double>& v, const char* what) {
  if (!std::is_sorted(v.begin(), v.end())) throw DomainError(std::string(what) + " must be sorted");
}

}  // namespace

long long required_spectrum_points(const SourceSpec& spec, double temperature_c, Interval window) {
  const double gamma = guard_linewidth(spec, spec.signal_polarization, window.center(), temperature_c);
  return std::max(2LL, static_cast<long long>(std::ceil(kPointsPerLinewidth * window.width() / gamma)) + 1);
}

SignalSpectrum signal_spectrum(const SourceSpec& spec, double pump_hz, double temperature_c, Interval window,
                               long long points) {
  if (!(window.hi > window.lo)) throw DomainError("spectrum window must have positive width");
  if (!(window.hi < pump_hz)) throw DomainError("spectrum window must lie below the pump frequency");
  const long long required = required_spectrum_points(spec, temperature_c, window);
  if (points < required)
    throw ResolutionError("spectrum resolution guard: " + std::to_string(points) + " points given, at least " +
                              std::to_string(required) + " needed for 8 samples per signal linewidth",
                          required);

  const CavityResponse cs = cavity_response(spec, spec.signal_polarization, temperature_c);
  const CavityResponse ci = cavity_response(spec, spec.idler_polarization, temperature_c);
  const double length = spec.length_at(temperature_c);
  const double grating = kTwoPi / spec.poling_period_at(temperature_c);
  const double beta_p = propagation_constant(spec.dispersion, spec.pump_polarization, pump_hz, temperature_c);

  SignalSpectrum s;
  s.pump_frequency = pump_hz;
  s.temperature = temperature_c;
  const auto n = static_cast<std::size_t>(points);
  s.frequencies.resize(n);
  s.values.resize(n);
  const double step = window.width() / static_cast<double>(n - 1);
  parallel_for(n, [&](std::size_t k) {
    const double nu_s = window.lo + step * static_cast<double>(k);
    const double nu_i = pump_hz - nu_s;
    const double bs = propagation_constant(spec.dispersion, spec.signal_polarization, nu_s, temperature_c);
    const double bi = propagation_constant(spec.dispersion, spec.idler_polarization, nu_i, temperature_c);
    const double pm = sinc(0.5 * (beta_p - bs - bi - grating) * length);
    // Round-trip phase phi = 2 beta L.
    s.frequencies[k] = nu_s;
    s.values[k] = pm * pm * cs.intensity_at_phase(2.0 * bs * length) * ci.intensity_at_phase(2.0 * bi * length);
  });
  const double peak = *std::max_element(s.values.begin(), s.values.end());
  if (!(peak > 0.0)) throw DomainError("signal spectrum vanishes across the window");
  for (double& v : s.values) v /= peak;
  return s;
}

ClusterReport detect_clusters(const std::vector<double>& f, const std::vector<double>& v, double gap_threshold) {
  const std::size_t n = v.size();
  if (n < 3 || f.size() != n) throw DomainError("cluster detection needs at least three samples");
  const double vmax = *std::max_element(v.begin(), v.end());
  if (!(vmax > 0.0)) throw DomainError("cluster detection on an all-zero spectrum");
  std::vector<std::size_t> peaks;
  for (std::size_t k = 0; k < n; ++k) {
    const double left = k > 0 ? v[k - 1] : -1.0;
    const double right = k + 1 < n ? v[k + 1] : -1.0;
    if (v[k] > left && v[k] >= right && v[k] > 1e-3 * vmax) peaks.push_back(k);
  }
  // Group peaks.
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [first, last] index into peaks
  for (std::size_t p = 0; p < peaks.size(); ++p) {
    if (p == 0 || f[peaks[p]] - f[peaks[p - 1]] > gap_threshold)
      groups.emplace_back(p, p);
    else
      groups.back().second = p;
  }
  // Sample-index boundaries halfway between groups.
  std::vector<std::size_t> bounds{0};
  for (std::size_t g = 1; g < groups.size(); ++g)
    bounds.push_back((peaks[groups[g - 1].second] + peaks[groups[g].first]) / 2);
  bounds.push_back(n - 1);

  ClusterReport r;
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Cluster c;
    double w = 0.0;
    for (std::size_t k = bounds[g]; k < bounds[g + 1]; ++k) w += 0.5 * (v[k] + v[k + 1]) * (f[k + 1] - f[k]);
    c.integrated_weight = w;
    c.peak_count = static_cast<int>(groups[g].second - groups[g].first + 1);
    std::size_t best = peaks[groups[g].first];
    for (std::size_t p = groups[g].first; p <= groups[g].second; ++p)
      if (v[peaks[p]] > v[best]) best = peaks[p];
    c.center = f[best];
    total += w;
    r.clusters.push_back(c);
  }
  for (auto& c : r.clusters) c.integrated_weight /= total;
  for (std::size_t g = 0; g < r.clusters.size(); ++g)
    if (r.clusters[g].integrated_weight > r.clusters[r.central_cluster_index].integrated_weight)
      r.central_cluster_index = g;
  r.central_fraction = r.clusters[r.central_cluster_index].integrated_weight;
  if (r.clusters.size() >= 2)
    r.spacing_measured = (r.clusters.back().center - r.clusters.front().center) /
                         static_cast<double>(r.clusters.size() - 1);
  return r;
}

ClusterReport detect_clusters(const SignalSpectrum& s, const SourceSpec& spec) {
  if (s.frequencies.size() < 3) throw DomainError("cluster detection needs at least three samples");
  const Interval window{s.frequencies.front(), s.frequencies.back()};
  const double spacing =
      cluster_spacing_estimate(spec, PhasematchPoint::at(spec, s.pump_frequency, window.center(), s.temperature));
  if (window.width() < 3.0 * spacing * (1.0 - 1e-9))
    throw DomainError("cluster detection window narrower than three cluster spacings");
  return detect_clusters(s.frequencies, s.values, 0.5 * spacing);
}

double dominant_peak(const SignalSpectrum& s) {
  const auto it = std::max_element(s.values.begin(), s.values.end());
  const auto k = static_cast<std::size_t>(it - s.values.begin());
  if (k == 0 || k + 1 >= s.values.size()) return s.frequencies[k];
  const double y0 = s.values[k - 1], y1 = s.values[k], y2 = s.values[k + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  const double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
  const double step = s.frequencies[k + 1] - s.frequencies[k];
  return s.frequencies[k] + shift * step;
}

PeakTrack pump_detuning_map(const SourceSpec& spec, double pump_hz, double temperature_c,
                            const std::vector<double>& pump_detunings, Interval window, long long points) {
  require_sorted(pump_detunings, "pump detunings");
  const double fsr = free_spectral_range(spec, spec.signal_polarization, window.center(), temperature_c);
  return track(
      pump_detunings,
      [&](double d) { return signal_spectrum(spec, pump_hz + d, temperature_c, window, points); }, fsr);
}

PeakTrack temperature_map(const SourceSpec& spec, double pump_hz, const std::vector<double>& temperatures,
                          Interval window, long long points) {
  require_sorted(temperatures, "temperatures");
  if (temperatures.empty()) return {};
  const double fsr = free_spectral_range(spec, spec.signal_polarization, window.center(), temperatures.front());
  return track(
      temperatures, [&](double T) { return signal_spectrum(spec, pump_hz, T, window, points); }, fsr);
}

namespace {

// Distance from 0 to the first offset at which hopped() becomes true, searching in `direction`.
// Returns {distance, found}.
std::pair<double, bool> first_hop(const std::function<bool(double)>& hopped, double direction, double step,
                                  double limit, double tolerance) {
  double inside = 0.0;
  double outside = -1.0;
  for (double x = step; x <= limit + 0.5 * step; x += step) {
    if (hopped(direction * x)) {
      outside = x;
      break;
    }
    inside = x;
  }
  if (outside < 0.0) return {limit, false};
  while (outside - inside > tolerance) {
    const double mid = 0.5 * (inside + outside);
    if (hopped(direction * mid))
      outside = mid;
    else
      inside = mid;
  }
  return {0.5 * (inside + outside), true};
}

}  // namespace

std::pair<StabilityWindow, StabilityWindow> stability_windows(const SourceSpec& spec, double pump_hz,
                                                              double temperature_c, const StabilityOptions& options) {
  const Polarization sp = spec.signal_polarization, ip = spec.idler_polarization;
  const double nu_pm = phasematched_signal(spec, pump_hz, temperature_c, options.signal_hint_hz);
  const PhasematchPoint pm_point = PhasematchPoint::at(spec, pump_hz, nu_pm, temperature_c);
  const double spacing = cluster_spacing_estimate(spec, pm_point);
  const Interval window = Interval::around(nu_pm, options.window_clusters * spacing);
  const long long points = required_spectrum_points(spec, temperature_c, window);
  const double fsr_s = free_spectral_range(spec, sp, nu_pm, temperature_c);
  const double gamma = std::min(resonance_linewidth(spec, sp, nu_pm, temperature_c),
                                resonance_linewidth(spec, ip, pump_hz - nu_pm, temperature_c));

  auto center_at = [&](double pump, double T) {
    return dominant_peak(signal_spectrum(spec, pump, T, window, points));
  };
  const double center0 = center_at(pump_hz, temperature_c);

  // A setpoint sitting on a hop flips under a perturbation much smaller than a linewidth.
  const double probe = 0.02 * gamma;
  for (double d : {-probe, probe})
    if (std::abs(center_at(pump_hz + d, temperature_c) - center0) >= 0.5 * fsr_s)
      throw DomainError("setpoint is not mode-hop-free: dominant resonance changes under a " +
                        std::to_string(probe / 1e6) + " MHz pump perturbation");

  // Rate at which the pair mismatch (nu_p - nu_s,res - nu_i,res) changes with temperature.
  const double dT = 1e-3;
  auto mismatch = [&](double T) {
    const double s = nearest_resonance(spec, sp, center0, T);
    const double i = nearest_resonance(spec, ip, pump_hz - center0, T);
    return pump_hz - s - i;
  };
  const double rate = std::abs(mismatch(temperature_c + dT) - mismatch(temperature_c - dT)) / (2.0 * dT);

  StabilityWindow pw{StabilityParameter::PumpFrequency};
  pw.setpoint = pump_hz;
  const double pump_step = 0.5 * gamma;
  const double pump_limit = 2.0 * fsr_s;
  auto pump_hopped = [&](double d) { return std::abs(center_at(pump_hz + d, temperature_c) - center0) >= 0.5 * fsr_s; };
  std::tie(pw.up, pw.hop_found_up) = first_hop(pump_hopped, +1.0, pump_step, pump_limit, options.pump_tolerance_hz);
  std::tie(pw.down, pw.hop_found_down) = first_hop(pump_hopped, -1.0, pump_step, pump_limit, options.pump_tolerance_hz);
  pw.halfwidth = std::min(pw.up, pw.down);

  StabilityWindow tw{StabilityParameter::Temperature};
  tw.setpoint = temperature_c;
  const double t_step = rate > 0.0 ? pump_step / rate : 1e-4;
  const double t_limit = rate > 0.0 ? pump_limit / rate : 1.0;
  auto t_hopped = [&](double d) { return std::abs(center_at(pump_hz, temperature_c + d) - center0) >= 0.5 * fsr_s; };
  std::tie(tw.up, tw.hop_found_up) = first_hop(t_hopped, +1.0, t_step, t_limit, options.temperature_tolerance_k);
  std::tie(tw.down, tw.hop_found_down) = first_hop(t_hopped, -1.0, t_step, t_limit, options.temperature_tolerance_k);
  tw.halfwidth = std::min(tw.up, tw.down);
  if (!(pw.halfwidth > 0.0) || !(tw.halfwidth > 0.0)) throw DomainError("degenerate stability window");
  return {pw, tw};
}

}  // namespace respdc
