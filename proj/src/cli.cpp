#include "respdc/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "respdc/brightness.hpp"
#include "respdc/design.hpp"
#include "respdc/error.hpp"
#include "respdc/parallel.hpp"
#include "respdc/spectrum.hpp"
#include "respdc/tuning.hpp"

namespace respdc::cli {

namespace {

using nlohmann::json;

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    rows_.push_back(std::move(cells));
  }
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string str() const {
    std::string out;
    append(out, header_);
    for (const auto& r : rows_) append(out, r);
    return out;
  }

 private:
  static void append(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// NaN and infinities have no JSON spelling; they become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

struct Operating {
  PhasematchPoint setpoint;
  PumpSpec pump;
  std::optional<double> signal_hint_hz;
};

Operating operating_point(const RunConfig& c) {
  std::optional<double> hint;
  if (c.signal_hint_wavelength_m) hint = wavelength_to_frequency(*c.signal_hint_wavelength_m);
  const PhasematchPoint sp =
      double_resonance_setpoint(c.source, wavelength_to_frequency(c.pump_wavelength_m), c.temperature_c, hint);
  PumpSpec pump = c.pump;
  pump.central_frequency = sp.pump_frequency();
  pump.validate();
  return {sp, pump, hint};
}

json setpoint_json(const PhasematchPoint& p) {
  return {{"pump_frequency_hz", number(p.pump_frequency())},
          {"signal_frequency_hz", number(p.signal_frequency())},
          {"idler_frequency_hz", number(p.idler_frequency())},
          {"signal_wavelength_nm", number(frequency_to_wavelength(p.signal_frequency()) * 1e9)},
          {"idler_wavelength_nm", number(frequency_to_wavelength(p.idler_frequency()) * 1e9)},
          {"temperature_c", number(p.temperature())},
          {"poling_period_um", number(p.poling_period() * 1e6)}};
}

json purity_json(const PurityReport& r) {
  return {{"mode_excitation", number(r.mode_excitation)},
          {"schmidt_number", number(r.schmidt_number)},
          {"spectral_purity", number(r.spectral_purity)},
          {"total_purity", number(r.total_purity)},
          {"dominant_signal_hz", number(r.dominant_signal_hz)},
          {"dominant_idler_hz", number(r.dominant_idler_hz)}};
}

json window_json(const StabilityWindow& w) {
  const bool pump = w.parameter == StabilityParameter::PumpFrequency;
  return {{"parameter", pump ? "pump_frequency" : "temperature"},
          {"unit", pump ? "Hz" : "K"},
          {"halfwidth", number(w.halfwidth)},
          {"setpoint", number(w.setpoint)},
          {"up", number(w.up)},
          {"down", number(w.down)},
          {"hop_found_up", w.hop_found_up},
          {"hop_found_down", w.hop_found_down}};
}

json brightness_json(const BrightnessReport& b) {
  return {{"clustering_factor", number(b.clustering_factor)},
          {"finesse_signal", number(b.finesse_signal)},
          {"finesse_idler", number(b.finesse_idler)},
          {"escape_probability", number(b.escape_probability)},
          {"enhancement_proportional", number(b.enhancement_proportional)},
          {"relative_spectral_brightness", number(b.relative_spectral_brightness)},
          {"redistribution_ratio", number(b.redistribution_ratio)},
          {"resonant_rate_ratio", number(b.resonant_rate_ratio)},
          {"degenerate", b.degenerate}};
}

json map_json(const DesignMap& m, const std::string& quantity) {
  json values = json::array();
  for (const auto& row : m.values) {
    json r = json::array();
    for (double v : row) r.push_back(number(v));
    values.push_back(std::move(r));
  }
  json lengths = json::array();
  for (double l : m.lengths) lengths.push_back(number(l * 1e3));
  json refl = json::array();
  for (double r : m.reflectivities) refl.push_back(number(r));
  return {{"lengths_mm", lengths}, {"reflectivities_r2", refl}, {"quantity", quantity}, {"values", values}};
}

// Matrix layout: the header row carries the reflectivity axis, the first column the length axis.
std::string map_csv(const DesignMap& m, const std::string& quantity) {
  std::vector<std::string> header{"length_mm \\ reflectivity_r2 (" + quantity + ")"};
  for (double r : m.reflectivities) header.push_back(format_number(r));
  Csv csv(std::move(header));
  for (std::size_t i = 0; i < m.lengths.size(); ++i) {
    std::vector<double> row{m.lengths[i] * 1e3};
    row.insert(row.end(), m.values[i].begin(), m.values[i].end());
    csv.row(row);
  }
  return csv.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[k] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (n - 1);
  return v;
}

struct SpectrumRun {
  SignalSpectrum spectrum;
  ClusterReport clusters;
  double spacing_estimate = 0.0;
};

SpectrumRun compute_spectrum(const RunConfig& c, const Operating& op) {
  const double spacing = cluster_spacing_estimate(c.source, op.setpoint);
  const Interval window = Interval::around(op.setpoint.signal_frequency(),
                                           c.spectrum.window_halfwidth_clusters * spacing);
  const long long points =
      c.spectrum.points > 0 ? c.spectrum.points : required_spectrum_points(c.source, c.temperature_c, window);
  SpectrumRun r;
  r.spectrum = signal_spectrum(c.source, op.setpoint.pump_frequency(), c.temperature_c, window, points);
  r.clusters = detect_clusters(r.spectrum, c.source);
  r.spacing_estimate = spacing;
  return r;
}

json clusters_json(const SpectrumRun& r, const Operating& op) {
  json list = json::array();
  for (const Cluster& cl : r.clusters.clusters)
    list.push_back({{"center_hz", number(cl.center)},
                    {"offset_hz", number(cl.center - op.setpoint.signal_frequency())},
                    {"integrated_weight", number(cl.integrated_weight)},
                    {"peak_count", cl.peak_count}});
  return {{"clusters", list},
          {"central_cluster_index", r.clusters.central_cluster_index},
          {"central_fraction", number(r.clusters.central_fraction)},
          {"spacing_measured_hz", number(r.clusters.spacing_measured)},
          {"spacing_estimate_hz", number(r.spacing_estimate)}};
}

std::string clusters_csv(const SpectrumRun& r, const Operating& op) {
  Csv csv({"center_hz", "offset_ghz", "integrated_weight", "peak_count", "central"});
  for (std::size_t k = 0; k < r.clusters.clusters.size(); ++k) {
    const Cluster& cl = r.clusters.clusters[k];
    csv.row({cl.center, (cl.center - op.setpoint.signal_frequency()) / kGHz, cl.integrated_weight,
             static_cast<double>(cl.peak_count), k == r.clusters.central_cluster_index ? 1.0 : 0.0});
  }
  return csv.str();
}

RunResult run_spectrum(const RunConfig& c) {
  const Operating op = operating_point(c);
  const SpectrumRun r = compute_spectrum(c, op);
  Csv csv({"signal_frequency_hz", "detuning_ghz", "intensity_norm"});
  for (std::size_t k = 0; k < r.spectrum.frequencies.size(); ++k)
    csv.row({r.spectrum.frequencies[k], (r.spectrum.frequencies[k] - op.setpoint.signal_frequency()) / kGHz,
             r.spectrum.values[k]});
  json j = clusters_json(r, op);
  j["setpoint"] = setpoint_json(op.setpoint);
  j["points"] = r.spectrum.frequencies.size();
  j["dominant_peak_hz"] = number(dominant_peak(r.spectrum));
  RunResult out;
  out.artifacts = {{"spectrum.csv", csv.str()}, {"spectrum.json", dump(j)}};
  out.summary = "spectrum: central_fraction=" + fmt("%.3f", r.clusters.central_fraction) +
                " clusters=" + std::to_string(r.clusters.clusters.size()) +
                " spacing=" + fmt("%.2f", r.clusters.spacing_measured / kGHz) + " GHz (estimate " +
                fmt("%.2f", r.spacing_estimate / kGHz) + " GHz)";
  return out;
}

RunResult run_clusters(const RunConfig& c) {
  const Operating op = operating_point(c);
  const SpectrumRun r = compute_spectrum(c, op);
  json j = clusters_json(r, op);
  j["setpoint"] = setpoint_json(op.setpoint);
  RunResult out;
  out.artifacts = {{"clusters.csv", clusters_csv(r, op)}, {"clusters.json", dump(j)}};
  out.summary = "clusters: count=" + std::to_string(r.clusters.clusters.size()) +
                " central_fraction=" + fmt("%.3f", r.clusters.central_fraction) +
                " spacing=" + fmt("%.2f", r.clusters.spacing_measured / kGHz) + " GHz";
  return out;
}

RunResult run_jsa(const RunConfig& c) {
  const Operating op = operating_point(c);
  const double fsr = free_spectral_range(c.source, c.source.signal_polarization, op.setpoint.signal_frequency(),
                                         c.temperature_c);
  const double half = c.jsa.window_fsr * fsr;
  const Interval iw = Interval::around(op.setpoint.idler_frequency(), half);
  const Interval sw = Interval::around(op.setpoint.signal_frequency(), half + op.pump.support_halfwidth());
  // The export window is narrower than a cluster spacing, so no idler filter is applied here.
  const JointSpectrum js = build_jsa(c.source, op.pump, c.temperature_c, sw, iw, default_jsa_step(c.source, op.setpoint));
  const PurityReport rep = purity_report(js);

  Csv csv({"signal_frequency_hz", "idler_frequency_hz", "abs_amplitude", "phase_rad", "in_filter"});
  const std::size_t stride = static_cast<std::size_t>(c.jsa.export_stride);
  for (std::size_t a = 0; a < js.rows(); a += stride) {
    const std::size_t b0 = js.band_begin(a);
    const std::size_t first = b0 + (stride - b0 % stride) % stride;
    for (std::size_t b = first; b < js.band_end(a); b += stride) {
      const std::complex<double> v = js.amplitude(a, b);
      csv.row({js.signal_grid().at(a), js.idler_grid().at(b), std::abs(v), std::arg(v), js.mask(a, b) ? 1.0 : 0.0});
    }
  }
  json j = purity_json(rep);
  j["setpoint"] = setpoint_json(op.setpoint);
  j["grid"] = {{"signal_start_hz", number(js.signal_grid().start)},
               {"idler_start_hz", number(js.idler_grid().start)},
               {"step_hz", number(js.signal_grid().step)},
               {"rows", js.rows()},
               {"cols", js.cols()},
               {"stored_cells", js.stored_cells()},
               {"export_stride", c.jsa.export_stride}};
  j["pump_fwhm_hz"] = number(op.pump.lineshape == PumpLineshape::Gaussian ? op.pump.bandwidth_fwhm : 0.0);
  RunResult out;
  out.artifacts = {{"jsa.csv", csv.str()}, {"jsa.json", dump(j)}};
  out.summary = "jsa: " + std::to_string(js.stored_cells()) + " stored cells, M=" + fmt("%.4f", rep.mode_excitation) +
                " K=" + fmt("%.4f", rep.schmidt_number) + " P=" + fmt("%.4f", rep.total_purity);
  return out;
}

RunResult run_purity(const RunConfig& c) {
  const Operating op = operating_point(c);
  const PurityReport rep = setpoint_purity(c.source, op.setpoint, op.pump);
  Csv csv({"quantity", "value"});
  csv.row({"mode_excitation", format_number(rep.mode_excitation)});
  csv.row({"schmidt_number", format_number(rep.schmidt_number)});
  csv.row({"spectral_purity", format_number(rep.spectral_purity)});
  csv.row({"total_purity", format_number(rep.total_purity)});
  json j = purity_json(rep);
  j["setpoint"] = setpoint_json(op.setpoint);
  j["pump_lineshape"] = op.pump.lineshape == PumpLineshape::Gaussian ? "gaussian" : "monochromatic";
  j["pump_fwhm_hz"] = number(op.pump.lineshape == PumpLineshape::Gaussian ? op.pump.bandwidth_fwhm : 0.0);
  RunResult out;
  out.artifacts = {{"purity.csv", csv.str()}, {"purity.json", dump(j)}};
  out.summary = "purity: P=" + fmt("%.4f", rep.total_purity) + " (M=" + fmt("%.4f", rep.mode_excitation) +
                ", S=" + fmt("%.4f", rep.spectral_purity) + ")";
  return out;
}

AxisRange lengths_in_m(const AxisRange& mm) { return {mm.min * kMm, mm.max * kMm, mm.steps}; }

RunResult run_bandwidth_map(const RunConfig& c) {
  const Operating op = operating_point(c);
  DesignMap m = bandwidth_map(c.source, op.setpoint.signal_frequency(), c.temperature_c,
                              lengths_in_m(c.maps.lengths_mm), c.maps.reflectivities);
  for (auto& row : m.values)
    for (double& v : row) v /= kMHz;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& row : m.values)
    for (double v : row) lo = std::min(lo, v), hi = std::max(hi, v);
  RunResult out;
  out.artifacts = {{"bandwidth_map.csv", map_csv(m, "linewidth_mhz")},
                   {"bandwidth_map.json", dump(map_json(m, "signal linewidth FWHM [MHz]"))}};
  out.summary = "bandwidth-map: " + std::to_string(m.lengths.size()) + "x" + std::to_string(m.reflectivities.size()) +
                " cells, linewidth " + fmt("%.3g", lo) + " to " + fmt("%.3g", hi) + " MHz";
  return out;
}

RunResult run_purity_map(const RunConfig& c) {
  const Operating op = operating_point(c);
  const DesignMap m = purity_map(c.source, wavelength_to_frequency(c.pump_wavelength_m), c.temperature_c,
                                 lengths_in_m(c.maps.lengths_mm), c.maps.reflectivities, op.pump);
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < m.lengths.size(); ++i)
    for (std::size_t j = 0; j < m.reflectivities.size(); ++j)
      if (m.values[i][j] > best) best = m.values[i][j], bi = i, bj = j;
  json j = map_json(m, "mode-excitation probability M");
  j["pump_fwhm_hz"] = number(op.pump.lineshape == PumpLineshape::Gaussian ? op.pump.bandwidth_fwhm : 0.0);
  RunResult out;
  out.artifacts = {{"purity_map.csv", map_csv(m, "mode_excitation")}, {"purity_map.json", dump(j)}};
  out.summary = "purity-map: max M=" + fmt("%.4f", best) + " at L=" + fmt("%.4g", m.lengths[bi] * 1e3) +
                " mm, R2=" + fmt("%.4g", m.reflectivities[bj]);
  return out;
}

RunResult run_purity_vs_pump(const RunConfig& c) {
  const Operating op = operating_point(c);
  std::vector<double> sigmas;
  for (double s : c.pump_sigmas_mhz) sigmas.push_back(s * kMHz);
  const PumpBandwidthScan scan = purity_vs_pump_bandwidth(c.source, op.setpoint, sigmas);
  Csv csv({"pump_fwhm_mhz", "schmidt_number", "spectral_purity"});
  json rows = json::array();
  for (const auto& r : scan.rows) {
    csv.row({r.sigma / kMHz, r.schmidt_number, r.spectral_purity});
    rows.push_back({{"pump_fwhm_hz", number(r.sigma)},
                    {"schmidt_number", number(r.schmidt_number)},
                    {"spectral_purity", number(r.spectral_purity)}});
  }
  json j = {{"rows", rows},
            {"crossover_hz", scan.crossover ? number(*scan.crossover) : json(nullptr)},
            {"signal_linewidth_hz", number(scan.signal_linewidth)},
            {"idler_linewidth_hz", number(scan.idler_linewidth)},
            {"setpoint", setpoint_json(op.setpoint)}};
  RunResult out;
  out.artifacts = {{"purity_vs_pump.csv", csv.str()}, {"purity_vs_pump.json", dump(j)}};
  out.summary = "purity-vs-pump: S>=0.9 from " +
                (scan.crossover ? fmt("%.1f", *scan.crossover / kMHz) + " MHz" : std::string("(not reached)")) +
                " (signal linewidth " + fmt("%.1f", scan.signal_linewidth / kMHz) + " MHz)";
  return out;
}

RunResult run_brightness(const RunConfig& c) {
  const Operating op = operating_point(c);
  const BrightnessReport b = enhancement_factor(c.source, op.setpoint, c.temperature_c);
  const double estimate = spectral_brightness_estimate(c.source, op.setpoint, c.temperature_c, c.reference_brightness);
  json j = brightness_json(b);
  j["reference_per_s_mw_mhz"] = number(c.reference_brightness);
  j["estimate_per_s_mw_mhz"] = number(estimate);
  j["setpoint"] = setpoint_json(op.setpoint);
  Csv csv({"quantity", "value"});
  for (const auto& [key, value] : j.items())
    if (value.is_number()) csv.row({key, format_number(value.get<double>())});
  RunResult out;
  out.artifacts = {{"brightness.csv", csv.str()}, {"brightness.json", dump(j)}};
  out.summary = "brightness: relative_spectral_brightness=" + fmt("%.4g", b.relative_spectral_brightness) +
                " estimate=" + fmt("%.3g", estimate) + " /(s mW MHz)";
  return out;
}

std::string track_csv(const PeakTrack& t, const std::string& abscissa, double abscissa_scale, double origin,
                      double signal_hz) {
  Csv csv({abscissa, "dominant_peak_hz", "dominant_peak_offset_ghz", "hop"});
  std::size_t h = 0;
  for (std::size_t k = 0; k < t.abscissa.size(); ++k) {
    const bool hop = h < t.hops.size() && t.hops[h] == k;
    if (hop) ++h;
    csv.row({(t.abscissa[k] - origin) * abscissa_scale, t.centers[k], (t.centers[k] - signal_hz) / kGHz,
             hop ? 1.0 : 0.0});
  }
  return csv.str();
}

json track_json(const PeakTrack& t) {
  json slopes = json::array();
  for (double s : t.drift_slopes) slopes.push_back(number(s));
  return {{"hops", t.hops}, {"drift_slopes", slopes}, {"overall_slope", number(t.overall_slope)},
          {"samples", t.abscissa.size()}};
}

RunResult run_stability(const RunConfig& c) {
  const Operating op = operating_point(c);
  StabilityOptions opts;
  opts.window_clusters = c.stability.window_halfwidth_clusters;
  opts.signal_hint_hz = op.signal_hint_hz;
  const auto [pw, tw] = stability_windows(c.source, op.setpoint.pump_frequency(), c.temperature_c, opts);

  const double spacing = cluster_spacing_estimate(c.source, op.setpoint);
  const Interval window = Interval::around(op.setpoint.signal_frequency(), c.stability.window_halfwidth_clusters * spacing);
  const long long points = required_spectrum_points(c.source, c.temperature_c, window);
  const double ds = c.stability.detuning_span_mhz * kMHz;
  const PeakTrack pump_track = pump_detuning_map(c.source, op.setpoint.pump_frequency(), c.temperature_c,
                                                 linspace(-ds, ds, c.stability.detuning_steps), window, points);
  const double ts = c.stability.temperature_span_mk * 1e-3;
  const PeakTrack temp_track =
      temperature_map(c.source, op.setpoint.pump_frequency(),
                      linspace(c.temperature_c - ts, c.temperature_c + ts, c.stability.temperature_steps), window,
                      points);

  json pm = track_json(pump_track);
  pm["abscissa_unit"] = "Hz";
  json tm = track_json(temp_track);
  tm["abscissa_unit"] = "C";
  json j = {{"pump_window", window_json(pw)},
            {"temperature_window", window_json(tw)},
            {"pump_map", pm},
            {"temperature_map", tm},
            {"setpoint", setpoint_json(op.setpoint)}};
  RunResult out;
  out.artifacts = {
      {"pump_detuning_map.csv",
       track_csv(pump_track, "pump_detuning_mhz", 1.0 / kMHz, 0.0, op.setpoint.signal_frequency())},
      {"temperature_map.csv",
       track_csv(temp_track, "temperature_offset_mk", 1e3, c.temperature_c, op.setpoint.signal_frequency())},
      {"stability.json", dump(j)}};
  out.summary = "stability: pump halfwidth=" + fmt("%.1f", pw.halfwidth / kMHz) + " MHz, temperature halfwidth=" +
                fmt("%.2f", tw.halfwidth * 1e3) + " mK, pump-map hops=" + std::to_string(pump_track.hops.size());
  return out;
}

RunResult run_fine_tune(const RunConfig& c) {
  const Operating op = operating_point(c);
  std::vector<double> offsets;
  for (double g : linspace(-c.fine_tune.offset_span_ghz, c.fine_tune.offset_span_ghz, c.fine_tune.points))
    offsets.push_back(g * kGHz);
  const TuningSchedule s = fine_tune_schedule(c.source, op.setpoint, c.temperature_c, offsets);
  Csv csv({"signal_offset_ghz", "temperature_c", "pump_offset_ghz", "residual_phase_signal_rad",
           "residual_phase_idler_rad", "predicted_temperature_c", "predicted_pump_offset_ghz",
           "dominant_peak_offset_ghz"});
  json entries = json::array();
  double worst = 0.0;
  const double p0 = s.setpoint.pump_frequency();
  const double s0 = s.setpoint.signal_frequency();
  for (const TuningEntry& e : s.entries) {
    worst = std::max({worst, std::abs(e.residual_phase_s), std::abs(e.residual_phase_i)});
    csv.row({e.signal_offset / kGHz, e.temperature, (e.pump_frequency - p0) / kGHz, e.residual_phase_s,
             e.residual_phase_i, e.predicted_temperature, (e.predicted_pump_frequency - p0) / kGHz,
             e.dominant_peak == 0.0 ? 0.0 : (e.dominant_peak - s0 - e.signal_offset) / kGHz});
    entries.push_back({{"signal_offset_hz", number(e.signal_offset)},
                       {"temperature_c", number(e.temperature)},
                       {"pump_frequency_hz", number(e.pump_frequency)},
                       {"residual_phase_signal_rad", number(e.residual_phase_s)},
                       {"residual_phase_idler_rad", number(e.residual_phase_i)},
                       {"predicted_temperature_c", number(e.predicted_temperature)},
                       {"predicted_pump_frequency_hz", number(e.predicted_pump_frequency)},
                       {"dominant_peak_hz", number(e.dominant_peak)}});
  }
  json j = {{"dT_dnu_s_c_per_ghz", number(s.coefficients.dT_dnu_s_c_per_ghz())},
            {"dnu_p_dnu_s", number(s.coefficients.dnu_p_dnu_s)},
            {"max_residual_phase_rad", number(worst)},
            {"entries", entries},
            {"setpoint", setpoint_json(s.setpoint)}};
  RunResult out;
  out.artifacts = {{"fine_tune.csv", csv.str()}, {"fine_tune.json", dump(j)}};
  out.summary = "fine-tune: dT/dnu_s=" + fmt("%.4f", s.coefficients.dT_dnu_s_c_per_ghz()) +
                " C/GHz dnu_p/dnu_s=" + fmt("%.4f", s.coefficients.dnu_p_dnu_s) + " over " +
                std::to_string(s.entries.size()) + " entries, max residual " + fmt("%.2e", worst) + " rad";
  return out;
}

json design_json(const DesignResult& d) {
  json notes = json::array();
  for (const auto& n : d.notes) notes.push_back(n);
  return {{"name", d.target.name},
          {"memory_wavelength_nm", number(d.memory_wavelength_m * 1e9)},
          {"partner_wavelength_nm", number(d.idler_wavelength_m * 1e9)},
          {"roles_swapped", d.roles_swapped},
          {"temperature_c", number(d.temperature_c)},
          {"poling_period_um", number(d.poling_period_m * 1e6)},
          {"length_mm", number(d.length_m * 1e3)},
          {"reflectivity_r2", number(d.reflectivity_r2)},
          {"pump_fwhm_hz", number(d.pump.lineshape == PumpLineshape::Gaussian ? d.pump.bandwidth_fwhm : 0.0)},
          {"memory_linewidth_hz", number(d.memory_linewidth_hz)},
          {"partner_linewidth_hz", number(d.partner_linewidth_hz)},
          {"target_bandwidth_hz", number(d.target.desired_bandwidth_hz)},
          {"minimum_total_purity", number(d.target.minimum_total_purity)},
          {"setpoint_pump_hz", number(d.setpoint_pump_hz)},
          {"setpoint_signal_hz", number(d.setpoint_signal_hz)},
          {"purity", purity_json(d.purity)},
          {"pump_window", window_json(d.pump_stability)},
          {"temperature_window", window_json(d.temperature_stability)},
          {"brightness", brightness_json(d.brightness)},
          {"feasible", d.feasible},
          {"binding_constraint", d.binding_constraint},
          {"notes", notes}};
}

RunResult run_design(const RunConfig& c) {
  if (!c.design.target) throw ConfigError("design: [design] needs memory_wavelength_nm, bandwidth_mhz and minimum_total_purity");
  const auto& ds = c.design;
  const bool fixed = ds.length_mm && ds.reflectivity_r2 && ds.pump_fwhm_mhz;
  const DesignResult d = fixed ? evaluate_design(*ds.target, c.source, *ds.length_mm * kMm, *ds.reflectivity_r2,
                                                 *ds.pump_fwhm_mhz * kMHz)
                               : design_for_memory(*ds.target, c.source);
  const json j = design_json(d);
  Csv csv({"quantity", "value"});
  for (const auto& [key, value] : j.items())
    if (value.is_number()) csv.row({key, format_number(value.get<double>())});
  for (const auto& [key, value] : j.at("purity").items()) csv.row({key, format_number(value.get<double>())});
  csv.row({std::string("feasible"), std::string(d.feasible ? "1" : "0")});
  RunResult out;
  out.artifacts = {{"design.csv", csv.str()}, {"design.json", dump(j)}};
  out.summary = std::string("design") + (d.target.name.empty() ? "" : " " + d.target.name) + ": " +
                (fixed ? "evaluated" : "found") + " L=" + fmt("%.3g", d.length_m * 1e3) +
                " mm R2=" + fmt("%.3g", d.reflectivity_r2) + " pump=" + fmt("%.3g", d.pump.bandwidth_fwhm / kMHz) +
                " MHz: linewidth=" + fmt("%.1f", d.memory_linewidth_hz / kMHz) + " MHz P=" +
                fmt("%.3f", d.purity.total_purity) + " partner=" + fmt("%.1f", d.idler_wavelength_m * 1e9) + " nm " +
                (d.feasible ? "feasible" : "infeasible (" + d.binding_constraint + ")");
  return out;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);  // folds -0 into 0
  return buf;
}

RunResult run(const std::string& subcommand, const RunConfig& config) {
  if (subcommand == "spectrum") return run_spectrum(config);
  if (subcommand == "clusters") return run_clusters(config);
  if (subcommand == "jsa") return run_jsa(config);
  if (subcommand == "purity") return run_purity(config);
  if (subcommand == "bandwidth-map") return run_bandwidth_map(config);
  if (subcommand == "purity-map") return run_purity_map(config);
  if (subcommand == "purity-vs-pump") return run_purity_vs_pump(config);
  if (subcommand == "brightness") return run_brightness(config);
  if (subcommand == "stability") return run_stability(config);
  if (subcommand == "fine-tune") return run_fine_tune(config);
  if (subcommand == "design") return run_design(config);
  throw ConfigError("unknown subcommand '" + subcommand + "'");
}

std::vector<std::filesystem::path> write_artifacts(const RunResult& result, const RunConfig& config) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_directory, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.output_directory.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path p = config.output_directory / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw ConfigError("cannot write " + p.string());
    return p;
  };
  std::vector<fs::path> written;
  for (const Artifact& a : result.artifacts) {
    const std::string ext = fs::path(a.filename).extension().string();
    const bool keep = config.output_format == OutputFormat::Both ||
                      (ext == ".csv" && config.output_format == OutputFormat::Csv) ||
                      (ext == ".json" && config.output_format == OutputFormat::Json);
    if (keep) written.push_back(write(a.filename, a.content));
  }
  written.push_back(write("resolved_config.toml", toml::dump(resolved_config(config))));
  return written;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Doubly-resonant PDC source toolkit", "respdc"};
  app.set_help_flag("-h,--help", "Print this help message and exit");
  std::string config_path, out_dir, format;
  int threads = 0;
  bool emit = false;
  app.add_option("--config", config_path, "Run configuration (TOML)");
  app.add_option("--out", out_dir, "Output directory (overrides [output] directory)");
  app.add_option("--format", format, "Artifact format: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--threads", threads, "Worker threads (default: available parallelism)")->check(CLI::PositiveNumber);
  app.add_flag("--emit-config", emit, "Print the fully resolved configuration and exit");
  app.require_subcommand(0, 1);
  app.fallthrough();
  for (const std::string& name : kSubcommands) app.add_subcommand(name)->fallthrough();
  const std::string descriptions[] = {
      "cw signal spectrum at the double-resonance setpoint", "cluster decomposition of the signal spectrum",
      "joint spectral amplitude export and purity", "mode-excitation probability and spectral purity",
      "signal linewidth over length and output reflectivity", "mode-excitation probability over length and reflectivity",
      "spectral purity versus pump bandwidth", "resonant spectral brightness relative to single pass",
      "mode-hop-free windows and pump/temperature maps", "co-tuning schedule of temperature and pump frequency",
      "source design for a memory wavelength"};
  for (std::size_t k = 0; k < kSubcommands.size(); ++k) app.get_subcommand(kSubcommands[k])->description(descriptions[k]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const auto chosen = app.get_subcommands();
  if (chosen.empty() && !emit) {
    err << "error: a subcommand is required\n" << app.help();
    return 2;
  }

  try {
    RunConfig config;
    if (config_path.empty()) {
      config.source = demonstrator_source();
      config.sellmeier_file = kDefaultSellmeierFile;
    } else {
      config = load_run_config(config_path);
    }
    if (!out_dir.empty()) config.output_directory = out_dir;
    if (!format.empty()) config.output_format = parse_output_format(format);
    if (threads > 0) set_thread_count(static_cast<unsigned>(threads));

    if (emit) {
      out << toml::dump(resolved_config(config));
      return 0;
    }
    const RunResult result = run(chosen.front()->get_name(), config);
    write_artifacts(result, config);
    out << result.summary << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace respdc::cli
