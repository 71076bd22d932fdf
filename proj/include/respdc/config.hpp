#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "respdc/design.hpp"
#include "respdc/toml.hpp"

namespace respdc {

enum class OutputFormat { Csv, Json, Both };
OutputFormat parse_output_format(const std::string& text);
std::string to_string(OutputFormat f);

struct SpectrumSettings {
  double window_halfwidth_clusters = 1.5;
  long long points = 0;  // 0: minimum satisfying the resolution guard
};

struct StabilitySettings {
  double detuning_span_mhz = 600.0;  // pump map covers [-span, +span]
  int detuning_steps = 121;
  double temperature_span_mk = 40.0;
  int temperature_steps = 81;
  double window_halfwidth_clusters = 0.5;
};

struct MapSettings {
  AxisRange lengths_mm{2.0, 80.0, 6};
  AxisRange reflectivities{0.70, 0.99, 6};
};

struct JsaSettings {
  double window_fsr = 1.5;  // export window halfwidth in FSRs around the setpoint
  int export_stride = 1;
};

struct FineTuneSettings {
  double offset_span_ghz = 2.3;
  int points = 47;
};

struct DesignSettings {
  std::optional<MemoryTarget> target;
  // When all three are set, `design` evaluates this configuration instead of searching.
  std::optional<double> length_mm;
  std::optional<double> reflectivity_r2;
  std::optional<double> pump_fwhm_mhz;
};

struct RunConfig {
  std::filesystem::path config_path;
  SourceSpec source;
  std::string sellmeier_file;
  double pump_wavelength_m = 532e-9;
  std::optional<double> signal_hint_wavelength_m;  // selects the phase-matching root
  double temperature_c = 148.14;
  PumpSpec pump;  // central frequency is set from the double-resonance setpoint at run time
  std::filesystem::path output_directory = "respdc_out";
  OutputFormat output_format = OutputFormat::Both;
  SpectrumSettings spectrum;
  StabilitySettings stability;
  MapSettings maps;
  JsaSettings jsa;
  std::vector<double> pump_sigmas_mhz{10, 20, 30, 50, 70, 100, 150, 200, 300, 500};
  FineTuneSettings fine_tune;
  double reference_brightness = 15.0;  // pairs / (s mW MHz)
  DesignSettings design;
};

// Builds the demonstrator source in code (12.3 mm, 0.99/0.98 mirrors, grating solved for
// 532 nm -> 890 nm at 148.14 C) with the default dispersion data.
SourceSpec demonstrator_source();

SourceSpec source_from_toml(const toml::Table& root, std::string* sellmeier_file = nullptr);
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_toml(const toml::Table& root);
// Fully resolved configuration (all defaults filled in, solved poling period included).
toml::Table resolved_config(const RunConfig& config);

}  // namespace respdc
