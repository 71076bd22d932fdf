#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "respdc/phasematch.hpp"

namespace respdc {

enum class PumpLineshape { Monochromatic, Gaussian };

struct PumpSpec {
  double central_frequency = 0.0;  // Hz
  double bandwidth_fwhm = 100e6;   // Hz, intensity FWHM; ignored for a monochromatic pump
  PumpLineshape lineshape = PumpLineshape::Gaussian;

  void validate() const;
  // Spectral amplitude at a detuning from the central frequency.
  double amplitude(double detuning_hz) const;
  // Detuning beyond which the amplitude is treated as zero (4.5 sigma, amplitude < 1e-12).
  double support_halfwidth() const;
};

struct UniformGrid {
  double start = 0.0;
  double step = 0.0;
  std::size_t size = 0;

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  double back() const { return at(size - 1); }
};

// Discretized joint spectral amplitude. The signal and idler grids share one step and are
// offset so that grid anti-diagonals are lines of constant nu_s + nu_i; only cells inside the
// pump support are stored (one contiguous column band per row), all other cells are exactly 0.
class JointSpectrum {
 public:
  const UniformGrid& signal_grid() const { return signal_; }
  const UniformGrid& idler_grid() const { return idler_; }
  std::size_t rows() const { return signal_.size; }
  std::size_t cols() const { return idler_.size; }

  std::complex<double> amplitude(std::size_t a, std::size_t b) const;
  // The filter acts on the idler frequency only; all-true without a filter.
  bool mask(std::size_t a, std::size_t b) const { (void)a; return idler_mask_[b]; }
  bool idler_masked(std::size_t b) const { return idler_mask_[b]; }
  const std::optional<Interval>& filter() const { return filter_; }

  // Stored band of row a: columns [band_begin(a), band_end(a)).
  std::size_t band_begin(std::size_t a) const { return row_begin_[a]; }
  std::size_t band_end(std::size_t a) const { return row_begin_[a] + row_length_[a]; }
  const std::complex<double>* band_data(std::size_t a) const { return values_.data() + row_offset_[a]; }
  std::size_t stored_cells() const { return values_.size(); }

  // Cavity order (round-trip phase / 2 pi, rounded) of the nearest resonance for each grid point.
  long long signal_order(std::size_t a) const { return signal_order_[a]; }
  long long idler_order(std::size_t b) const { return idler_order_[b]; }

  const SourceSpec& spec() const { return spec_; }
  const PumpSpec& pump() const { return pump_; }
  double temperature() const { return temperature_; }

  // Total masked |amplitude|^2 times the cell area.
  double masked_norm() const;
  Eigen::MatrixXcd dense() const;

 private:
  friend JointSpectrum build_jsa(const SourceSpec&, const PumpSpec&, double, Interval, Interval, double);
  friend JointSpectrum apply_cluster_filter(JointSpectrum, const SourceSpec&, std::optional<double>);

  UniformGrid signal_;
  UniformGrid idler_;
  std::vector<std::size_t> row_begin_;
  std::vector<std::size_t> row_length_;
  std::vector<std::size_t> row_offset_;
  std::vector<std::complex<double>> values_;
  std::vector<long long> signal_order_;
  std::vector<long long> idler_order_;
  std::vector<bool> idler_mask_;
  std::optional<Interval> filter_;
  SourceSpec spec_;
  PumpSpec pump_;
  double temperature_ = 0.0;
};

// Grid step giving 8 points per linewidth on the narrower of the two cavities.
double default_jsa_step(const SourceSpec& spec, const PhasematchPoint& point);

// resolution = common grid step in Hz.
JointSpectrum build_jsa(const SourceSpec& spec, const PumpSpec& pump, double temperature_c, Interval signal_window,
                        Interval idler_window, double resolution);

// Top-hat idler filter centred on the central cluster of the idler marginal; width defaults
// to cluster_spacing_estimate.
JointSpectrum apply_cluster_filter(JointSpectrum js, const SourceSpec& spec,
                                   std::optional<double> filter_fwhm = std::nullopt);

struct DominantPair {
  long long signal_order = 0;
  long long idler_order = 0;
  double weight_fraction = 0.0;
};
DominantPair dominant_pair(const JointSpectrum& js);
double mode_excitation_probability(const JointSpectrum& js);

enum class SchmidtRegion { DominantModeOnly, FullFiltered };
double schmidt_number(const JointSpectrum& js, SchmidtRegion region);
// K = 1 / sum(lambda_n^4) with sum(lambda_n^2) = 1, lambda_n the singular values.
double schmidt_number(const Eigen::MatrixXd& region);
double schmidt_number(const Eigen::MatrixXcd& region);
// |amplitude| on the region selected for the decomposition.
Eigen::MatrixXd schmidt_region(const JointSpectrum& js, SchmidtRegion region);

struct PurityReport {
  double mode_excitation = 0.0;
  double schmidt_number = 1.0;
  double spectral_purity = 1.0;
  double total_purity = 0.0;
  double dominant_signal_hz = 0.0;
  double dominant_idler_hz = 0.0;
};
PurityReport purity_report(const JointSpectrum& js);

// Windows covering the central cluster around a double-resonance setpoint: the idler window
// spans `idler_width` (default 1.05 cluster spacings), the signal window adds the pump support.
std::pair<Interval, Interval> central_cluster_windows(const SourceSpec& spec, const PhasematchPoint& setpoint,
                                                      const PumpSpec& pump,
                                                      std::optional<double> idler_width = std::nullopt);

// Central-cluster JSA at the setpoint with the default filter, then the full report.
PurityReport setpoint_purity(const SourceSpec& spec, const PhasematchPoint& setpoint, const PumpSpec& pump,
                             std::optional<double> step = std::nullopt);

struct PumpBandwidthRow {
  double sigma = 0.0;
  double schmidt_number = 1.0;
  double spectral_purity = 1.0;
};
struct PumpBandwidthScan {
  std::vector<PumpBandwidthRow> rows;
  std::optional<double> crossover;  // smallest sigma with S >= 0.9, log-interpolated
  double signal_linewidth = 0.0;
  double idler_linewidth = 0.0;
};
// K of the dominant resonance pair versus pump bandwidth, for one geometry.
PumpBandwidthScan purity_vs_pump_bandwidth(const SourceSpec& spec, const PhasematchPoint& setpoint,
                                           const std::vector<double>& sigmas);

}  // namespace respdc
