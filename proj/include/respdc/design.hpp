#pragma once

#include <optional>
#include <string>
#include <vector>

#include "respdc/brightness.hpp"
#include "respdc/jsa.hpp"
#include "respdc/spectrum.hpp"

namespace respdc {

struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  std::vector<double> values() const;  // linear spacing, endpoints included
};

struct DesignMap {
  std::vector<double> lengths;         // m, rows
  std::vector<double> reflectivities;  // R_s,2, columns
  std::vector<std::vector<double>> values;  // values[row][col]
};

// Source with a new length and signal output reflectivity; everything else from `base`.
SourceSpec with_geometry(const SourceSpec& base, double length_m, double signal_r2);

// Signal resonance linewidth over (L, R_s,2).
DesignMap bandwidth_map(const SourceSpec& base, double signal_frequency_hz, double temperature_c,
                        const AxisRange& lengths, const AxisRange& reflectivities);

struct PurityMapOptions {
  bool cluster_filter = true;  // false: whole-window mask
};
// Mode-excitation probability over (L, R_s,2), each cell at its own double-resonance setpoint.
DesignMap purity_map(const SourceSpec& base, double nominal_pump_hz, double temperature_c, const AxisRange& lengths,
                     const AxisRange& reflectivities, const PumpSpec& pump, const PurityMapOptions& options = {});

struct MemoryTarget {
  double signal_wavelength_m = 852e-9;  // memory-coupled photon
  double desired_bandwidth_hz = 500e6;
  double minimum_total_purity = 0.9;
  double pump_wavelength_m = 532e-9;
  std::string name;

  void validate() const;
};

struct DesignResult {
  MemoryTarget target;
  SourceSpec source;       // in the role assignment used for the evaluation
  PumpSpec pump;
  bool roles_swapped = false;  // memory photon is the lower-frequency (extraordinary) photon
  double temperature_c = 148.14;
  double poling_period_m = 0.0;  // at temperature_c
  double memory_wavelength_m = 0.0;
  double idler_wavelength_m = 0.0;  // partner (heralding) photon
  double length_m = 0.0;
  double reflectivity_r2 = 0.0;
  double memory_linewidth_hz = 0.0;
  double partner_linewidth_hz = 0.0;
  double setpoint_pump_hz = 0.0;
  double setpoint_signal_hz = 0.0;
  PurityReport purity;
  StabilityWindow pump_stability;
  StabilityWindow temperature_stability;
  BrightnessReport brightness;
  bool feasible = false;
  std::string binding_constraint;  // empty when feasible
  std::vector<std::string> notes;
};

inline constexpr double kDesignTemperatureC = 148.14;

// Evaluates one (L, R_2, sigma_p) configuration. Both photons use the same mirror pair
// (input facet from `base`, output facet `reflectivity_r2`).
DesignResult evaluate_design(const MemoryTarget& target, const SourceSpec& base, double length_m,
                             double reflectivity_r2, double pump_fwhm_hz);

struct DesignSearchOptions {
  AxisRange lengths{1e-3, 100e-3, 34};  // sampled geometrically
  AxisRange reflectivities{0.5, 0.995, 34};
  double bandwidth_tolerance = 0.2;
};

DesignResult design_for_memory(const MemoryTarget& target, const SourceSpec& base,
                               const DesignSearchOptions& options = {});

}  // namespace respdc
