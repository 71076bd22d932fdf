#include "respdc/config.hpp"

#include <algorithm>
#include <set>

#include "respdc/error.hpp"

namespace respdc {

namespace {

void check_keys(const toml::Table& t, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : t.entries())
    if (!allowed.count(key))
      throw ConfigError(t.source + ":" + std::to_string(value.line) + ": unknown key '" + key + "' in [" +
                        t.name + "]");
}

const toml::Table& empty_table() {
  static const toml::Table t;
  return t;
}

const toml::Table& section(const toml::Table& root, const std::string& name) {
  const toml::Table* t = root.subtable(name);
  return t ? *t : empty_table();
}

AxisRange read_axis(const toml::Table& t, const std::string& prefix, const AxisRange& fallback) {
  AxisRange r = fallback;
  r.min = t.number_or(prefix + "_min", r.min);
  r.max = t.number_or(prefix + "_max", r.max);
  r.steps = static_cast<int>(t.number_or(prefix + "_steps", r.steps));
  if (r.steps < 1 || r.max < r.min) throw ConfigError(t.source + ": invalid " + prefix + " range in [" + t.name + "]");
  return r;
}

void set_number(toml::Table& t, const std::string& key, double v) { t[key].data = v; }
void set_int(toml::Table& t, const std::string& key, long long v) { t[key].data = v; }
void set_string(toml::Table& t, const std::string& key, const std::string& v) { t[key].data = v; }
void set_numbers(toml::Table& t, const std::string& key, const std::vector<double>& v) {
  toml::Array a;
  for (double x : v) a.push_back(toml::Value{x, 0});
  t[key].data = std::move(a);
}

}  // namespace

OutputFormat parse_output_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  if (text == "both") return OutputFormat::Both;
  throw ConfigError("output format must be csv, json or both, got '" + text + "'");
}

std::string to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    default: return "both";
  }
}

SourceSpec demonstrator_source() {
  SourceSpec s;
  s.length_m = 12.3e-3;
  s.mirrors_signal = {0.99, 0.98};
  s.mirrors_idler = {0.99, 0.98};
  s.loss_signal_db_per_cm = 0.016;
  s.loss_idler_db_per_cm = 0.022;
  s.dispersion = default_dispersion_model();
  s.thermal = ThermalModel{1.5e-5, 148.14};
  s.set_poling_period_at(solve_poling_period(s, 532e-9, 890e-9, 148.14), 148.14);
  return s;
}

SourceSpec source_from_toml(const toml::Table& root, std::string* sellmeier_file) {
  const toml::Table& src = section(root, "source");
  const toml::Table& disp = section(root, "dispersion");
  const toml::Table& th = section(root, "thermal");
  check_keys(src, {"length_mm", "reference_temperature_c", "poling_period_um", "design_pump_wavelength_nm",
                   "design_signal_wavelength_nm", "loss_signal_db_per_cm", "loss_idler_db_per_cm", "signal_r1",
                   "signal_r2", "idler_r1", "idler_r2", "signal_polarization", "idler_polarization",
                   "pump_polarization"});
  check_keys(disp, {"sellmeier_file", "mode_offset_ordinary", "mode_offset_extraordinary"});
  check_keys(th, {"expansion_coefficient_per_k"});

  SourceSpec s;
  s.length_m = src.number("length_mm") * 1e-3;
  s.thermal.reference_temperature_c = src.number_or("reference_temperature_c", 148.14);
  s.thermal.expansion_coefficient = th.number_or("expansion_coefficient_per_k", 1.5e-5);
  s.loss_signal_db_per_cm = src.number_or("loss_signal_db_per_cm", 0.0);
  s.loss_idler_db_per_cm = src.number_or("loss_idler_db_per_cm", 0.0);
  s.mirrors_signal = {src.number_or("signal_r1", 0.0), src.number_or("signal_r2", 0.0)};
  s.mirrors_idler = {src.number_or("idler_r1", s.mirrors_signal.r1), src.number_or("idler_r2", s.mirrors_signal.r2)};
  s.pump_polarization = parse_polarization(src.string_or("pump_polarization", "ordinary"));
  s.signal_polarization = parse_polarization(src.string_or("signal_polarization", "ordinary"));
  s.idler_polarization = parse_polarization(src.string_or("idler_polarization", "extraordinary"));

  const std::string file = disp.string_or("sellmeier_file", kDefaultSellmeierFile);
  if (sellmeier_file) *sellmeier_file = file;
  std::filesystem::path p = file;
  if (p.is_relative()) p = data_directory() / p;
  s.dispersion = DispersionModel::load(p)
                     .with_mode_offset(Polarization::Ordinary, disp.number_or("mode_offset_ordinary", 0.0))
                     .with_mode_offset(Polarization::Extraordinary, disp.number_or("mode_offset_extraordinary", 0.0));

  if (auto period = src.optional_number("poling_period_um")) {
    s.poling_period_m = *period * 1e-6;
  } else {
    const double lp = src.number("design_pump_wavelength_nm") * 1e-9;
    const double ls = src.number("design_signal_wavelength_nm") * 1e-9;
    const double T = s.reference_temperature_c();
    s.set_poling_period_at(solve_poling_period(s, lp, ls, T), T);
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(src.source + ": [source] " + e.what());
  }
  return s;
}

RunConfig run_config_from_toml(const toml::Table& root) {
  check_keys(root, {"source", "dispersion", "thermal", "operation", "pump", "output", "spectrum", "stability", "maps",
                    "jsa", "purity_vs_pump", "fine_tune", "brightness", "design"});
  RunConfig c;
  c.source = source_from_toml(root, &c.sellmeier_file);

  const toml::Table& op = section(root, "operation");
  check_keys(op, {"pump_wavelength_nm", "temperature_c", "signal_wavelength_nm"});
  c.pump_wavelength_m = op.number_or("pump_wavelength_nm", 532.0) * 1e-9;
  c.temperature_c = op.number_or("temperature_c", c.source.reference_temperature_c());
  if (auto s = op.optional_number("signal_wavelength_nm")) c.signal_hint_wavelength_m = *s * 1e-9;

  const toml::Table& pump = section(root, "pump");
  check_keys(pump, {"lineshape", "bandwidth_fwhm_mhz"});
  const std::string shape = pump.string_or("lineshape", "gaussian");
  if (shape == "gaussian")
    c.pump.lineshape = PumpLineshape::Gaussian;
  else if (shape == "monochromatic")
    c.pump.lineshape = PumpLineshape::Monochromatic;
  else
    throw ConfigError(pump.source + ": [pump] lineshape must be gaussian or monochromatic");
  c.pump.bandwidth_fwhm = pump.number_or("bandwidth_fwhm_mhz", 100.0) * 1e6;
  c.pump.central_frequency = kSpeedOfLight / c.pump_wavelength_m;

  const toml::Table& out = section(root, "output");
  check_keys(out, {"directory", "format"});
  c.output_directory = out.string_or("directory", c.output_directory.string());
  c.output_format = parse_output_format(out.string_or("format", "both"));

  const toml::Table& sp = section(root, "spectrum");
  check_keys(sp, {"window_halfwidth_clusters", "points"});
  c.spectrum.window_halfwidth_clusters = sp.number_or("window_halfwidth_clusters", 1.5);
  c.spectrum.points = static_cast<long long>(sp.number_or("points", 0));

  const toml::Table& st = section(root, "stability");
  check_keys(st, {"detuning_span_mhz", "detuning_steps", "temperature_span_mk", "temperature_steps",
                  "window_halfwidth_clusters"});
  c.stability.detuning_span_mhz = st.number_or("detuning_span_mhz", c.stability.detuning_span_mhz);
  c.stability.detuning_steps = static_cast<int>(st.number_or("detuning_steps", c.stability.detuning_steps));
  c.stability.temperature_span_mk = st.number_or("temperature_span_mk", c.stability.temperature_span_mk);
  c.stability.temperature_steps = static_cast<int>(st.number_or("temperature_steps", c.stability.temperature_steps));
  c.stability.window_halfwidth_clusters =
      st.number_or("window_halfwidth_clusters", c.stability.window_halfwidth_clusters);

  const toml::Table& maps = section(root, "maps");
  check_keys(maps, {"length_mm_min", "length_mm_max", "length_mm_steps", "reflectivity_min", "reflectivity_max",
                    "reflectivity_steps"});
  c.maps.lengths_mm = read_axis(maps, "length_mm", c.maps.lengths_mm);
  c.maps.reflectivities = read_axis(maps, "reflectivity", c.maps.reflectivities);

  const toml::Table& jsa = section(root, "jsa");
  check_keys(jsa, {"window_fsr", "export_stride"});
  c.jsa.window_fsr = jsa.number_or("window_fsr", c.jsa.window_fsr);
  c.jsa.export_stride = static_cast<int>(jsa.number_or("export_stride", c.jsa.export_stride));
  if (c.jsa.export_stride < 1) throw ConfigError(jsa.source + ": [jsa] export_stride must be >= 1");

  const toml::Table& pvp = section(root, "purity_vs_pump");
  check_keys(pvp, {"sigmas_mhz"});
  if (pvp.contains("sigmas_mhz")) c.pump_sigmas_mhz = pvp.numbers("sigmas_mhz");

  const toml::Table& ft = section(root, "fine_tune");
  check_keys(ft, {"offset_span_ghz", "points"});
  c.fine_tune.offset_span_ghz = ft.number_or("offset_span_ghz", c.fine_tune.offset_span_ghz);
  c.fine_tune.points = static_cast<int>(ft.number_or("points", c.fine_tune.points));
  if (c.fine_tune.points < 1) throw ConfigError(ft.source + ": [fine_tune] points must be >= 1");

  const toml::Table& br = section(root, "brightness");
  check_keys(br, {"reference_per_s_mw_mhz"});
  c.reference_brightness = br.number_or("reference_per_s_mw_mhz", c.reference_brightness);

  const toml::Table& d = section(root, "design");
  check_keys(d, {"name", "memory_wavelength_nm", "bandwidth_mhz", "minimum_total_purity", "pump_wavelength_nm",
                 "length_mm", "reflectivity_r2", "pump_fwhm_mhz"});
  if (d.contains("memory_wavelength_nm")) {
    MemoryTarget t;
    t.name = d.string_or("name", "");
    t.signal_wavelength_m = d.number("memory_wavelength_nm") * 1e-9;
    t.desired_bandwidth_hz = d.number("bandwidth_mhz") * 1e6;
    t.minimum_total_purity = d.number("minimum_total_purity");
    t.pump_wavelength_m = d.number_or("pump_wavelength_nm", 532.0) * 1e-9;
    c.design.target = t;
  }
  c.design.length_mm = d.optional_number("length_mm");
  c.design.reflectivity_r2 = d.optional_number("reflectivity_r2");
  c.design.pump_fwhm_mhz = d.optional_number("pump_fwhm_mhz");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig c = run_config_from_toml(toml::parse_file(path));
  c.config_path = path;
  return c;
}

toml::Table resolved_config(const RunConfig& c) {
  toml::Table root;
  const SourceSpec& s = c.source;
  toml::Table& src = root.ensure_subtable("source");
  set_number(src, "length_mm", s.length_m * 1e3);
  set_number(src, "reference_temperature_c", s.reference_temperature_c());
  set_number(src, "poling_period_um", s.poling_period_m * 1e6);
  set_number(src, "loss_signal_db_per_cm", s.loss_signal_db_per_cm);
  set_number(src, "loss_idler_db_per_cm", s.loss_idler_db_per_cm);
  set_number(src, "signal_r1", s.mirrors_signal.r1);
  set_number(src, "signal_r2", s.mirrors_signal.r2);
  set_number(src, "idler_r1", s.mirrors_idler.r1);
  set_number(src, "idler_r2", s.mirrors_idler.r2);
  set_string(src, "pump_polarization", std::string(to_string(s.pump_polarization)));
  set_string(src, "signal_polarization", std::string(to_string(s.signal_polarization)));
  set_string(src, "idler_polarization", std::string(to_string(s.idler_polarization)));
  toml::Table& disp = root.ensure_subtable("dispersion");
  set_string(disp, "sellmeier_file", c.sellmeier_file);
  set_number(disp, "mode_offset_ordinary", s.dispersion.mode_offset(Polarization::Ordinary));
  set_number(disp, "mode_offset_extraordinary", s.dispersion.mode_offset(Polarization::Extraordinary));
  set_number(root.ensure_subtable("thermal"), "expansion_coefficient_per_k", s.thermal.expansion_coefficient);

  toml::Table& op = root.ensure_subtable("operation");
  set_number(op, "pump_wavelength_nm", c.pump_wavelength_m * 1e9);
  set_number(op, "temperature_c", c.temperature_c);
  if (c.signal_hint_wavelength_m) set_number(op, "signal_wavelength_nm", *c.signal_hint_wavelength_m * 1e9);
  toml::Table& pump = root.ensure_subtable("pump");
  set_string(pump, "lineshape", c.pump.lineshape == PumpLineshape::Gaussian ? "gaussian" : "monochromatic");
  set_number(pump, "bandwidth_fwhm_mhz", c.pump.bandwidth_fwhm * 1e-6);
  toml::Table& out = root.ensure_subtable("output");
  set_string(out, "directory", c.output_directory.string());
  set_string(out, "format", to_string(c.output_format));
  toml::Table& sp = root.ensure_subtable("spectrum");
  set_number(sp, "window_halfwidth_clusters", c.spectrum.window_halfwidth_clusters);
  set_int(sp, "points", c.spectrum.points);
  toml::Table& st = root.ensure_subtable("stability");
  set_number(st, "detuning_span_mhz", c.stability.detuning_span_mhz);
  set_int(st, "detuning_steps", c.stability.detuning_steps);
  set_number(st, "temperature_span_mk", c.stability.temperature_span_mk);
  set_int(st, "temperature_steps", c.stability.temperature_steps);
  set_number(st, "window_halfwidth_clusters", c.stability.window_halfwidth_clusters);
  toml::Table& maps = root.ensure_subtable("maps");
  set_number(maps, "length_mm_min", c.maps.lengths_mm.min);
  set_number(maps, "length_mm_max", c.maps.lengths_mm.max);
  set_int(maps, "length_mm_steps", c.maps.lengths_mm.steps);
  set_number(maps, "reflectivity_min", c.maps.reflectivities.min);
  set_number(maps, "reflectivity_max", c.maps.reflectivities.max);
  set_int(maps, "reflectivity_steps", c.maps.reflectivities.steps);
  toml::Table& jsa = root.ensure_subtable("jsa");
  set_number(jsa, "window_fsr", c.jsa.window_fsr);
  set_int(jsa, "export_stride", c.jsa.export_stride);
  set_numbers(root.ensure_subtable("purity_vs_pump"), "sigmas_mhz", c.pump_sigmas_mhz);
  toml::Table& ft = root.ensure_subtable("fine_tune");
  set_number(ft, "offset_span_ghz", c.fine_tune.offset_span_ghz);
  set_int(ft, "points", c.fine_tune.points);
  set_number(root.ensure_subtable("brightness"), "reference_per_s_mw_mhz", c.reference_brightness);
  if (c.design.target) {
    toml::Table& d = root.ensure_subtable("design");
    const MemoryTarget& t = *c.design.target;
    if (!t.name.empty()) set_string(d, "name", t.name);
    set_number(d, "memory_wavelength_nm", t.signal_wavelength_m * 1e9);
    set_number(d, "bandwidth_mhz", t.desired_bandwidth_hz * 1e-6);
    set_number(d, "minimum_total_purity", t.minimum_total_purity);
    set_number(d, "pump_wavelength_nm", t.pump_wavelength_m * 1e9);
    if (c.design.length_mm) set_number(d, "length_mm", *c.design.length_mm);
    if (c.design.reflectivity_r2) set_number(d, "reflectivity_r2", *c.design.reflectivity_r2);
    if (c.design.pump_fwhm_mhz) set_number(d, "pump_fwhm_mhz", *c.design.pump_fwhm_mhz);
  }
  return root;
}

}  // namespace respdc
