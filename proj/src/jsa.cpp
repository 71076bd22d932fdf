#include "respdc/jsa.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "respdc/error.hpp"
#include "respdc/parallel.hpp"
#include "respdc/spectrum.hpp"

namespace respdc {

namespace {

constexpr double kSupportSigmas = 4.5;
constexpr std::size_t kMaxDenseDimension = 4096;

template <typename Singular>
double schmidt_from_singular_values(const Singular& s) {
  double s2 = 0.0, s4 = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double v = s[k] * s[k];
    s2 += v;
    s4 += v * v;
  }
  if (!(s2 > 0.0)) throw DomainError("Schmidt decomposition of an all-zero region");
  return s2 * s2 / s4;
}

}  // namespace

void PumpSpec::validate() const {
  if (!(central_frequency > 0.0)) throw DomainError("pump central frequency must be positive");
  if (lineshape == PumpLineshape::Gaussian && !(bandwidth_fwhm > 0.0))
    throw DomainError("Gaussian pump bandwidth must be positive");
}

double PumpSpec::amplitude(double detuning_hz) const {
  if (lineshape == PumpLineshape::Monochromatic) return detuning_hz == 0.0 ? 1.0 : 0.0;
  const double x = detuning_hz / bandwidth_fwhm;
  return std::exp(-2.0 * std::log(2.0) * x * x);
}

double PumpSpec::support_halfwidth() const {
  return lineshape == PumpLineshape::Monochromatic ? 0.0 : kSupportSigmas * bandwidth_fwhm;
}

std::complex<double> JointSpectrum::amplitude(std::size_t a, std::size_t b) const {
  if (b < row_begin_[a] || b >= row_begin_[a] + row_length_[a]) return {0.0, 0.0};
  return values_[row_offset_[a] + (b - row_begin_[a])];
}

double JointSpectrum::masked_norm() const {
  double total = 0.0;
  for (std::size_t a = 0; a < rows(); ++a) {
    const std::complex<double>* row = band_data(a);
    for (std::size_t b = band_begin(a); b < band_end(a); ++b)
      if (idler_mask_[b]) total += std::norm(row[b - band_begin(a)]);
  }
  return total * signal_.step * idler_.step;
}

Eigen::MatrixXcd JointSpectrum::dense() const {
  if (rows() > kMaxDenseDimension || cols() > kMaxDenseDimension)
    throw DomainError("joint spectrum too large for a dense matrix");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (std::size_t a = 0; a < rows(); ++a)
    for (std::size_t b = band_begin(a); b < band_end(a); ++b)
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = band_data(a)[b - band_begin(a)];
  return m;
}

double default_jsa_step(const SourceSpec& spec, const PhasematchPoint& point) {
  const double T = point.temperature();
  const double gs = guard_linewidth(spec, spec.signal_polarization, point.signal_frequency(), T);
  const double gi = guard_linewidth(spec, spec.idler_polarization, point.idler_frequency(), T);
  const double g = std::min(gs, gi);
  // Without any cavity the sinc envelope is the finest structure.
  return std::isfinite(g) ? g / kPointsPerLinewidth : pm_bandwidth_estimate(spec, point) / 1000.0;
}

JointSpectrum build_jsa(const SourceSpec& spec, const PumpSpec& pump, double temperature_c, Interval signal_window,
                        Interval idler_window, double resolution) {
  pump.validate();
  if (!(signal_window.width() > 0.0) || !(idler_window.width() > 0.0))
    throw DomainError("joint spectrum windows must have positive width");
  const double nu_p = pump.central_frequency;
  const double T = temperature_c;
  const Polarization sp = spec.signal_polarization, ip = spec.idler_polarization;
  const double gs = guard_linewidth(spec, sp, signal_window.center(), T);
  const double gi = guard_linewidth(spec, ip, idler_window.center(), T);
  const double max_step = std::min(gs, gi) / kPointsPerLinewidth;
  if (!(resolution > 0.0) || resolution > max_step * (1.0 + 1e-12)) {
    const auto required = static_cast<long long>(std::ceil(signal_window.width() / max_step)) + 1;
    throw ResolutionError("joint spectrum resolution guard: step must not exceed min linewidth / 8; need at least " +
                              std::to_string(required) + " signal grid points",
                          required);
  }
  const double h = resolution;

  JointSpectrum js;
  js.spec_ = spec;
  js.pump_ = pump;
  js.temperature_ = T;
  js.signal_ = {signal_window.lo, h, static_cast<std::size_t>(std::floor(signal_window.width() / h)) + 1};
  // Idler nodes sit at nu_p - nu_s[0] - j h so that row a, column b has pump detuning (a + b - diag) h.
  const auto diag = static_cast<long long>(std::floor((nu_p - signal_window.lo - idler_window.lo) / h));
  const double idler_start = nu_p - signal_window.lo - static_cast<double>(diag) * h;
  js.idler_ = {idler_start, h, static_cast<std::size_t>(std::floor((idler_window.hi - idler_start) / h)) + 1};
  if (!(idler_start > 0.0)) throw DomainError("idler window must lie at positive frequency");
  const std::size_t ns = js.signal_.size, ni = js.idler_.size;
  if (ns < 2 || ni < 2) throw DomainError("joint spectrum windows narrower than two grid steps");

  const auto reach = static_cast<long long>(std::floor(pump.support_halfwidth() / h));
  const long long k_lo = diag - reach, k_hi = diag + reach;  // stored anti-diagonals a + b

  const double length = spec.length_at(T);
  const double grating = kTwoPi / spec.poling_period_at(T);
  const CavityResponse cs = cavity_response(spec, sp, T);
  const CavityResponse ci = cavity_response(spec, ip, T);

  std::vector<double> beta_s(ns), beta_i(ni), beta_p(static_cast<std::size_t>(k_hi - k_lo + 1)),
      f_p(beta_p.size());
  std::vector<std::complex<double>> a_s(ns), a_i(ni);
  js.signal_order_.resize(ns);
  js.idler_order_.resize(ni);
  parallel_for(ns, [&](std::size_t a) {
    beta_s[a] = propagation_constant(spec.dispersion, sp, js.signal_.at(a), T);
    const double phi = 2.0 * beta_s[a] * length;
    a_s[a] = cs.at_phase(phi);
    js.signal_order_[a] = std::llround(phi / kTwoPi);
  });
  parallel_for(ni, [&](std::size_t b) {
    beta_i[b] = propagation_constant(spec.dispersion, ip, js.idler_.at(b), T);
    const double phi = 2.0 * beta_i[b] * length;
    a_i[b] = ci.at_phase(phi);
    js.idler_order_[b] = std::llround(phi / kTwoPi);
  });
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double detuning = static_cast<double>(k - diag) * h;
    const auto idx = static_cast<std::size_t>(k - k_lo);
    beta_p[idx] = propagation_constant(spec.dispersion, spec.pump_polarization, nu_p + detuning, T);
    f_p[idx] = pump.lineshape == PumpLineshape::Monochromatic ? 1.0 : pump.amplitude(detuning);
  }

  js.row_begin_.resize(ns);
  js.row_length_.resize(ns);
  js.row_offset_.resize(ns);
  std::size_t offset = 0;
  for (std::size_t a = 0; a < ns; ++a) {
    const long long sa = static_cast<long long>(a);
    const long long b0 = std::max<long long>(0, k_lo - sa);
    const long long b1 = std::min<long long>(static_cast<long long>(ni) - 1, k_hi - sa);
    js.row_begin_[a] = static_cast<std::size_t>(std::max<long long>(b0, 0));
    js.row_length_[a] = b1 >= b0 ? static_cast<std::size_t>(b1 - b0 + 1) : 0;
    if (b1 < b0) js.row_begin_[a] = 0;
    js.row_offset_[a] = offset;
    offset += js.row_length_[a];
  }
  js.values_.assign(offset, {0.0, 0.0});
  parallel_for(ns, [&](std::size_t a) {
    std::complex<double>* out = js.values_.data() + js.row_offset_[a];
    for (std::size_t j = 0; j < js.row_length_[a]; ++j) {
      const std::size_t b = js.row_begin_[a] + j;
      const auto idx = static_cast<std::size_t>(static_cast<long long>(a + b) - k_lo);
      const double dbeta = beta_p[idx] - beta_s[a] - beta_i[b] - grating;
      out[j] = f_p[idx] * sinc(0.5 * dbeta * length) * a_s[a] * a_i[b];
    }
  });
  js.idler_mask_.assign(ni, true);
  return js;
}

JointSpectrum apply_cluster_filter(JointSpectrum js, const SourceSpec& spec, std::optional<double> filter_fwhm) {
  const std::size_t ni = js.cols();
  std::vector<double> freqs(ni), marginal(ni, 0.0);
  for (std::size_t b = 0; b < ni; ++b) freqs[b] = js.idler_.at(b);
  for (std::size_t a = 0; a < js.rows(); ++a)
    for (std::size_t b = js.band_begin(a); b < js.band_end(a); ++b)
      marginal[b] += std::norm(js.band_data(a)[b - js.band_begin(a)]);

  const double nu_p = js.pump_.central_frequency;
  const std::size_t peak_col =
      static_cast<std::size_t>(std::max_element(marginal.begin(), marginal.end()) - marginal.begin());
  const PhasematchPoint pt = PhasematchPoint::at(spec, nu_p, nu_p - freqs[peak_col], js.temperature_);
  const double spacing = cluster_spacing_estimate(spec, pt);
  const ClusterReport clusters = detect_clusters(freqs, marginal, 0.5 * spacing);
  const double center = clusters.clusters[clusters.central_cluster_index].center;
  const double width = filter_fwhm.value_or(spacing);
  if (!(width >= 0.0)) throw DomainError("filter width must be non-negative");
  const double span = js.idler_.back() - js.idler_.start + js.idler_.step;
  if (width > span * (1.0 + 1e-12)) throw DomainError("cluster filter wider than the idler window");
  js.filter_ = Interval::around(center, 0.5 * width);
  for (std::size_t b = 0; b < ni; ++b) js.idler_mask_[b] = std::abs(freqs[b] - center) <= 0.5 * width;
  return js;
}

namespace {

struct PairWeights {
  std::map<std::pair<long long, long long>, double> weights;
  double total = 0.0;
};

PairWeights pair_weights(const JointSpectrum& js) {
  PairWeights pw;
  for (std::size_t a = 0; a < js.rows(); ++a) {
    const std::complex<double>* row = js.band_data(a);
    const long long ms = js.signal_order(a);
    std::size_t b = js.band_begin(a);
    const std::size_t end = js.band_end(a);
    while (b < end) {
      const long long mi = js.idler_order(b);
      double run = 0.0;
      bool any = false;
      for (; b < end && js.idler_order(b) == mi; ++b)
        if (js.idler_masked(b)) {
          run += std::norm(row[b - js.band_begin(a)]);
          any = true;
        }
      if (any) {
        pw.weights[{ms, mi}] += run;
        pw.total += run;
      }
    }
  }
  return pw;
}

}  // namespace

DominantPair dominant_pair(const JointSpectrum& js) {
  PairWeights pw = pair_weights(js);
  if (pw.weights.empty()) throw DomainError("empty filter mask: no cells to evaluate");
  if (!(pw.total > 0.0)) throw DomainError("joint spectrum vanishes inside the filter mask");
  auto best = pw.weights.begin();
  for (auto it = pw.weights.begin(); it != pw.weights.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first.first, best->first.second, best->second / pw.total};
}

double mode_excitation_probability(const JointSpectrum& js) { return dominant_pair(js).weight_fraction; }

Eigen::MatrixXd schmidt_region(const JointSpectrum& js, SchmidtRegion region) {
  std::size_t a0 = js.rows(), a1 = 0, b0 = js.cols(), b1 = 0;  // half-open bounds
  if (region == SchmidtRegion::DominantModeOnly) {
    const DominantPair d = dominant_pair(js);
    for (std::size_t a = 0; a < js.rows(); ++a)
      if (js.signal_order(a) == d.signal_order) {
        a0 = std::min(a0, a);
        a1 = a + 1;
      }
    for (std::size_t b = 0; b < js.cols(); ++b)
      if (js.idler_order(b) == d.idler_order && js.idler_masked(b)) {
        b0 = std::min(b0, b);
        b1 = b + 1;
      }
  } else {
    a0 = 0;
    a1 = js.rows();
    for (std::size_t b = 0; b < js.cols(); ++b)
      if (js.idler_masked(b)) {
        b0 = std::min(b0, b);
        b1 = b + 1;
      }
  }
  if (a1 <= a0 || b1 <= b0 || a1 - a0 < 4 || b1 - b0 < 4)
    throw DomainError("insufficient resolution for decomposition");
  if (a1 - a0 > kMaxDenseDimension || b1 - b0 > kMaxDenseDimension)
    throw DomainError("decomposition region exceeds " + std::to_string(kMaxDenseDimension) + " cells per axis");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a1 - a0), static_cast<Eigen::Index>(b1 - b0));
  for (std::size_t a = a0; a < a1; ++a) {
    const std::size_t lo = std::max(b0, js.band_begin(a)), hi = std::min(b1, js.band_end(a));
    for (std::size_t b = lo; b < hi; ++b)
      if (js.idler_masked(b))
        m(static_cast<Eigen::Index>(a - a0), static_cast<Eigen::Index>(b - b0)) =
            std::abs(js.band_data(a)[b - js.band_begin(a)]);
  }
  return m;
}

double schmidt_number(const Eigen::MatrixXd& region) {
  if (region.size() == 0) throw DomainError("Schmidt decomposition of an empty region");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(region);
  return schmidt_from_singular_values(svd.singularValues());
}

double schmidt_number(const Eigen::MatrixXcd& region) {
  if (region.size() == 0) throw DomainError("Schmidt decomposition of an empty region");
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(region);
  return schmidt_from_singular_values(svd.singularValues());
}

double schmidt_number(const JointSpectrum& js, SchmidtRegion region) {
  return schmidt_number(schmidt_region(js, region));
}

PurityReport purity_report(const JointSpectrum& js) {
  const DominantPair d = dominant_pair(js);
  PurityReport r;
  r.mode_excitation = d.weight_fraction;
  r.schmidt_number = schmidt_number(js, SchmidtRegion::DominantModeOnly);
  r.spectral_purity = 1.0 / r.schmidt_number;
  r.total_purity = r.mode_excitation * r.spectral_purity;
  const SourceSpec& spec = js.spec();
  const double T = js.temperature();
  // Locate the grid points of the dominant orders to seed the resonance solves.
  double seed_s = js.signal_grid().start, seed_i = js.idler_grid().start;
  for (std::size_t a = 0; a < js.rows(); ++a)
    if (js.signal_order(a) == d.signal_order) {
      seed_s = js.signal_grid().at(a);
      break;
    }
  for (std::size_t b = 0; b < js.cols(); ++b)
    if (js.idler_order(b) == d.idler_order) {
      seed_i = js.idler_grid().at(b);
      break;
    }
  r.dominant_signal_hz = resonance_of_order(spec, spec.signal_polarization, d.signal_order, seed_s, T);
  r.dominant_idler_hz = resonance_of_order(spec, spec.idler_polarization, d.idler_order, seed_i, T);
  return r;
}

std::pair<Interval, Interval> central_cluster_windows(const SourceSpec& spec, const PhasematchPoint& setpoint,
                                                      const PumpSpec& pump, std::optional<double> idler_width) {
  const double width = idler_width.value_or(1.05 * cluster_spacing_estimate(spec, setpoint));
  const Interval idler = Interval::around(setpoint.idler_frequency(), 0.5 * width);
  const Interval signal = Interval::around(setpoint.signal_frequency(), 0.5 * width + pump.support_halfwidth());
  return {signal, idler};
}

PurityReport setpoint_purity(const SourceSpec& spec, const PhasematchPoint& setpoint, const PumpSpec& pump,
                             std::optional<double> step) {
  PumpSpec p = pump;
  p.central_frequency = setpoint.pump_frequency();
  const auto [sw, iw] = central_cluster_windows(spec, setpoint, p);
  const double h = step.value_or(default_jsa_step(spec, setpoint));
  JointSpectrum js = build_jsa(spec, p, setpoint.temperature(), sw, iw, h);
  return purity_report(apply_cluster_filter(std::move(js), spec));
}

PumpBandwidthScan purity_vs_pump_bandwidth(const SourceSpec& spec, const PhasematchPoint& setpoint,
                                           const std::vector<double>& sigmas) {
  const double T = setpoint.temperature();
  PumpBandwidthScan scan;
  scan.signal_linewidth = resonance_linewidth(spec, spec.signal_polarization, setpoint.signal_frequency(), T);
  scan.idler_linewidth = resonance_linewidth(spec, spec.idler_polarization, setpoint.idler_frequency(), T);
  const double fsr_s = free_spectral_range(spec, spec.signal_polarization, setpoint.signal_frequency(), T);
  const double fsr_i = free_spectral_range(spec, spec.idler_polarization, setpoint.idler_frequency(), T);
  const double h = default_jsa_step(spec, setpoint);
  for (double sigma : sigmas) {
    if (!(sigma > 0.0)) throw DomainError("pump bandwidths must be positive");
    PumpSpec pump{setpoint.pump_frequency(), sigma, PumpLineshape::Gaussian};
    // The dominant pair's Voronoi cell plus one neighbouring resonance on each side.
    const Interval iw = Interval::around(setpoint.idler_frequency(), 1.5 * fsr_i);
    const Interval sw = Interval::around(setpoint.signal_frequency(), 1.5 * fsr_s + pump.support_halfwidth());
    const JointSpectrum js = build_jsa(spec, pump, T, sw, iw, h);
    PumpBandwidthRow row;
    row.sigma = sigma;
    row.schmidt_number = schmidt_number(js, SchmidtRegion::DominantModeOnly);
    row.spectral_purity = 1.0 / row.schmidt_number;
    scan.rows.push_back(row);
  }
  std::sort(scan.rows.begin(), scan.rows.end(), [](auto& x, auto& y) { return x.sigma < y.sigma; });
  for (std::size_t k = 0; k < scan.rows.size(); ++k) {
    if (scan.rows[k].spectral_purity >= 0.9) {
      if (k == 0) {
        scan.crossover = scan.rows[0].sigma;
      } else {
        const auto& lo = scan.rows[k - 1];
        const auto& hi = scan.rows[k];
        const double t = (0.9 - lo.spectral_purity) / (hi.spectral_purity - lo.spectral_purity);
        scan.crossover = std::exp(std::log(lo.sigma) + t * (std::log(hi.sigma) - std::log(lo.sigma)));
      }
      break;
    }
  }
  return scan;
}

}  // namespace respdc
