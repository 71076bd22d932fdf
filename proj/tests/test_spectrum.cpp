#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "respdc/error.hpp"
#include "respdc/spectrum.hpp"

using namespace respdc;
using namespace respdc::test;

namespace {
constexpr auto O = Polarization::Ordinary;

const SignalSpectrum& demo_spectrum() {
  static const SignalSpectrum s = [] {
    const SourceSpec& spec = demonstrator();
    const PhasematchPoint& p = demonstrator_setpoint();
    const Interval w = Interval::around(p.signal_frequency(), 1.5 * cluster_spacing_estimate(spec, p));
    return signal_spectrum(spec, p.pump_frequency(), kDemoT, w, required_spectrum_points(spec, kDemoT, w));
  }();
  return s;
}
}  // namespace

TEST_CASE("spectrum without mirrors is the bare envelope") {
  SourceSpec s = demonstrator();
  s.mirrors_signal = {0, 0};
  s.mirrors_idler = {0, 0};
  s.loss_signal_db_per_cm = s.loss_idler_db_per_cm = 0;
  const double nu0 = phasematched_signal(s, kDemoPump, kDemoT);
  const SignalSpectrum sp = signal_spectrum(s, kDemoPump, kDemoT, Interval::around(nu0, 300e9), 2001);
  std::vector<double> env(sp.frequencies.size());
  for (std::size_t k = 0; k < env.size(); ++k)
    env[k] = std::pow(pm_amplitude(s, PhasematchPoint::at(s, kDemoPump, sp.frequencies[k], kDemoT)), 2);
  const double mx = *std::max_element(env.begin(), env.end());
  for (std::size_t k = 0; k < env.size(); ++k) CHECK(std::abs(sp.values[k] - env[k] / mx) < 1e-12);
}

TEST_CASE("resolution guard states the required point count") {
  const SourceSpec& s = demonstrator();
  const Interval w = Interval::around(kSpeedOfLight / 890e-9, 50e9);
  const long long need = required_spectrum_points(s, kDemoT, w);
  try {
    signal_spectrum(s, kDemoPump, kDemoT, w, need / 2);
    FAIL("expected an error");
  } catch (const ResolutionError& e) {
    CHECK(e.required() == need);
    CHECK(std::string(e.what()).find(std::to_string(need)) != std::string::npos);
  }
}

TEST_CASE("demonstrator spectrum and clusters") {
  const SignalSpectrum& sp = demo_spectrum();
  CHECK(*std::max_element(sp.values.begin(), sp.values.end()) == 1.0);
  CHECK(*std::min_element(sp.values.begin(), sp.values.end()) >= 0.0);
  const ClusterReport r = detect_clusters(sp, demonstrator());
  REQUIRE(r.clusters.size() >= 3);
  double total = 0;
  for (const auto& c : r.clusters) total += c.integrated_weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& c : r.clusters) CHECK(c.integrated_weight <= r.clusters[r.central_cluster_index].integrated_weight);
  CHECK(r.central_fraction == doctest::Approx(0.90).epsilon(0.05 / 0.9));
  const Cluster& central = r.clusters[r.central_cluster_index];
  const double dom = dominant_peak(sp);
  CHECK(std::abs(dom - central.center) < 0.5 * cluster_spacing_estimate(demonstrator(), demonstrator_setpoint()));
  const double est = cluster_spacing_estimate(demonstrator(), demonstrator_setpoint());
  CHECK(r.spacing_measured == doctest::Approx(est).epsilon(0.1));
  CHECK(r.clusters[r.central_cluster_index - 1].center - central.center == doctest::Approx(-est).epsilon(0.1));
  CHECK(r.clusters[r.central_cluster_index + 1].center - central.center == doctest::Approx(est).epsilon(0.1));
}

TEST_CASE("dominant peak is stable under grid refinement") {
  const SourceSpec& s = demonstrator();
  const PhasematchPoint& p = demonstrator_setpoint();
  const Interval w = Interval::around(p.signal_frequency(), 0.5 * cluster_spacing_estimate(s, p));
  const long long n = required_spectrum_points(s, kDemoT, w);
  const double lw = resonance_linewidth(s, O, p.signal_frequency(), kDemoT);
  const double a = dominant_peak(signal_spectrum(s, p.pump_frequency(), kDemoT, w, n));
  const double b = dominant_peak(signal_spectrum(s, p.pump_frequency(), kDemoT, w, 2 * n));
  CHECK(std::abs(a - b) < lw / 10);
  CHECK(std::abs(a - p.signal_frequency()) < lw / 8);
}

TEST_CASE("cluster detection guards and single-peak case") {
  const SourceSpec& s = demonstrator();
  const PhasematchPoint& p = demonstrator_setpoint();
  const Interval narrow = Interval::around(p.signal_frequency(), 20e9);
  const SignalSpectrum sp =
      signal_spectrum(s, p.pump_frequency(), kDemoT, narrow, required_spectrum_points(s, kDemoT, narrow));
  CHECK_THROWS_AS(detect_clusters(sp, s), DomainError);

  std::vector<double> f(2001), v(2001);
  for (int k = 0; k < 2001; ++k) {
    f[k] = k * 1e6;
    const double x = (f[k] - 1e9) / 5e6;
    v[k] = 1.0 / (1.0 + x * x);
  }
  const ClusterReport r = detect_clusters(f, v, 1e12);
  CHECK(r.clusters.size() == 1);
  CHECK(r.central_fraction == 1.0);
  CHECK(r.spacing_measured == 0.0);
}

TEST_CASE("without the idler cavity every comb line under the envelope is populated") {
  SourceSpec s = demonstrator();
  s.mirrors_idler = {0, 0};
  const double nu0 = phasematched_signal(s, kDemoPump, kDemoT);
  const Interval w = Interval::around(nu0, 40e9);
  const SignalSpectrum sp = signal_spectrum(s, kDemoPump, kDemoT, w, required_spectrum_points(s, kDemoT, w));
  const ClusterReport r = detect_clusters(sp.frequencies, sp.values, 1e12);
  const ResonanceComb comb = find_resonances(s, O, w, kDemoT);
  std::size_t inside = 0;
  for (double c : comb.centers) inside += (c > w.lo + 1e8 && c < w.hi - 1e8);
  REQUIRE(r.clusters.size() == 1);
  CHECK(static_cast<std::size_t>(r.clusters[0].peak_count) >= inside);
  CHECK(static_cast<std::size_t>(r.clusters[0].peak_count) <= comb.centers.size());
}

TEST_CASE("pump detuning map") {
  const SourceSpec& s = demonstrator();
  const PhasematchPoint& p = demonstrator_setpoint();
  const Interval w = Interval::around(p.signal_frequency(), 0.5 * cluster_spacing_estimate(s, p));
  const long long n = required_spectrum_points(s, kDemoT, w);
  std::vector<double> coarse, fine;
  for (int k = -12; k <= 12; ++k) coarse.push_back(k * 50e6);
  for (int k = -24; k <= 24; ++k) fine.push_back(k * 25e6);
  const PeakTrack a = pump_detuning_map(s, p.pump_frequency(), kDemoT, coarse, w, n);
  const PeakTrack b = pump_detuning_map(s, p.pump_frequency(), kDemoT, fine, w, n);
  const double lw = resonance_linewidth(s, O, p.signal_frequency(), kDemoT);
  CHECK(std::abs(a.centers[12] - p.signal_frequency()) < lw / 4);
  REQUIRE(!a.hops.empty());
  REQUIRE(!b.hops.empty());
  // the first hop on each side moves by at most one coarse step under refinement
  auto first_up = [](const PeakTrack& t) {
    for (std::size_t h : t.hops)
      if (t.abscissa[h] > 0) return t.abscissa[h];
    return 0.0;
  };
  CHECK(std::abs(first_up(a) - first_up(b)) <= 50e6 + 1.0);
}

TEST_CASE("temperature map starts at the setpoint resonance") {
  const SourceSpec& s = demonstrator();
  const PhasematchPoint& p = demonstrator_setpoint();
  const Interval w = Interval::around(p.signal_frequency(), 0.5 * cluster_spacing_estimate(s, p));
  const PeakTrack t = temperature_map(s, p.pump_frequency(), {kDemoT - 0.002, kDemoT, kDemoT + 0.002}, w,
                                      required_spectrum_points(s, kDemoT, w));
  const double lw = resonance_linewidth(s, O, p.signal_frequency(), kDemoT);
  CHECK(std::abs(t.centers[1] - p.signal_frequency()) < lw / 4);
  CHECK(t.hops.empty());
  REQUIRE(t.drift_slopes.size() == 1);
}

TEST_CASE("stability windows of the demonstrator") {
  const SourceSpec& s = demonstrator();
  const PhasematchPoint& p = demonstrator_setpoint();
  const auto [pw, tw] = stability_windows(s, p.pump_frequency(), kDemoT);
  CHECK(pw.parameter == StabilityParameter::PumpFrequency);
  CHECK(tw.parameter == StabilityParameter::Temperature);
  CHECK(pw.halfwidth > 0);
  CHECK(tw.halfwidth > 0);
  CHECK(pw.halfwidth == std::min(pw.up, pw.down));
  CHECK(tw.halfwidth == std::min(tw.up, tw.down));

  // dense-scan oracle for the upward pump hop
  const Interval w = Interval::around(p.signal_frequency(), 0.5 * cluster_spacing_estimate(s, p));
  const long long n = required_spectrum_points(s, kDemoT, w);
  std::vector<double> det;
  for (double d = 0; d <= pw.up + 20e6; d += 1e6) det.push_back(d);
  const PeakTrack t = pump_detuning_map(s, p.pump_frequency(), kDemoT, det, w, n);
  REQUIRE(!t.hops.empty());
  const double scanned = t.abscissa[t.hops.front()];
  CHECK(std::abs(scanned - pw.up) <= 1e6 + 2 * 0.1e6);
}

TEST_CASE("symmetric toy cavity has symmetric pump windows") {
  SourceSpec s = constant_spec(2.2, 5e-3, {0.95, 0.95});
  s.dispersion = DispersionModel::constant(2.2, 2.1);
  s.set_poling_period_at(solve_poling_period(s, 532e-9, 890e-9, kDemoT), kDemoT);
  const PhasematchPoint p = double_resonance_setpoint(s, kDemoPump, kDemoT);
  const auto [pw, tw] = stability_windows(s, p.pump_frequency(), kDemoT);
  CHECK(pw.up == doctest::Approx(pw.down).epsilon(0.05));
  CHECK(tw.up == doctest::Approx(tw.down).epsilon(0.05));
}

TEST_CASE("stability requires a mode-hop-free setpoint") {
  const SourceSpec& s = demonstrator();
  const PhasematchPoint& p = demonstrator_setpoint();
  // The upper window edge is a hop location to within the bisection tolerance.
  const auto [pw, tw] = stability_windows(s, p.pump_frequency(), kDemoT);
  REQUIRE(pw.hop_found_up);
  CHECK_THROWS_AS(stability_windows(s, p.pump_frequency() + pw.up, kDemoT), DomainError);
}
