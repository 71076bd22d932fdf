#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "respdc/phasematch.hpp"

namespace respdc {

struct SignalSpectrum {
  std::vector<double> frequencies;  // Hz, uniform
  std::vector<double> values;       // normalized to unit maximum
  double pump_frequency = 0.0;
  double temperature = 0.0;
};

struct Cluster {
  double center = 0.0;  // frequency of the cluster's highest peak
  double integrated_weight = 0.0;
  int peak_count = 0;
};

struct ClusterReport {
  std::vector<Cluster> clusters;
  std::size_t central_cluster_index = 0;
  double central_fraction = 0.0;
  double spacing_measured = 0.0;  // mean spacing of adjacent cluster centers, 0 for a single cluster
};

enum class StabilityParameter { PumpFrequency, Temperature };

struct StabilityWindow {
  StabilityParameter parameter = StabilityParameter::PumpFrequency;
  double halfwidth = 0.0;  // Hz or K
  double setpoint = 0.0;   // Hz or C
  double up = 0.0;         // distance to the first hop above the setpoint
  double down = 0.0;       // distance to the first hop below the setpoint
  bool hop_found_up = false;
  bool hop_found_down = false;
};

// Minimum samples per signal linewidth demanded by signal_spectrum.
inline constexpr double kPointsPerLinewidth = 8.0;

// Number of points that satisfies the resolution guard for `window`.
long long required_spectrum_points(const SourceSpec& spec, double temperature_c, Interval window);

SignalSpectrum signal_spectrum(const SourceSpec& spec, double pump_hz, double temperature_c, Interval window,
                               long long points);

// Peak grouping primitive: peaks above 1e-3 of max, gaps above gap_threshold split clusters.
ClusterReport detect_clusters(const std::vector<double>& frequencies, const std::vector<double>& values,
                              double gap_threshold);
// Uses cluster_spacing_estimate at the spectrum's phase-matched point; needs >= 3 spacings of window.
ClusterReport detect_clusters(const SignalSpectrum& s, const SourceSpec& spec);

// Dominant-peak frequency, refined by a parabola through the three highest samples.
double dominant_peak(const SignalSpectrum& s);

struct PeakTrack {
  std::vector<double> abscissa;  // detuning in Hz or temperature in C
  std::vector<double> centers;   // dominant-peak frequency, Hz
  std::vector<std::size_t> hops; // indices k with a jump >= FSR/2 between k-1 and k
  std::vector<double> drift_slopes;  // Hz per abscissa unit for each hop-free segment of >= 2 points
  double overall_slope = 0.0;        // least-squares slope over the whole scan
};

PeakTrack pump_detuning_map(const SourceSpec& spec, double pump_hz, double temperature_c,
                            const std::vector<double>& pump_detunings, Interval window, long long points);
PeakTrack temperature_map(const SourceSpec& spec, double pump_hz, const std::vector<double>& temperatures,
                          Interval window, long long points);

struct StabilityOptions {
  double pump_tolerance_hz = 0.1e6;
  double temperature_tolerance_k = 1e-5;
  // Spectrum window halfwidth in units of the cluster spacing.
  double window_clusters = 0.5;
  // Selects the phase-matching root when the signal role is the lower-frequency photon.
  std::optional<double> signal_hint_hz;
};

std::pair<StabilityWindow, StabilityWindow> stability_windows(const SourceSpec& spec, double pump_hz,
                                                              double temperature_c,
                                                              const StabilityOptions& options = {});

}  // namespace respdc
