// Acceptance runner: one pass/fail line per criterion; exit status 0 only on pass.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "respdc/brightness.hpp"
#include "respdc/cli.hpp"
#include "respdc/design.hpp"
#include "respdc/jsa.hpp"
#include "respdc/spectrum.hpp"
#include "respdc/tuning.hpp"

namespace fs = std::filesystem;
using namespace respdc;
using namespace respdc::test;

namespace {

constexpr auto O = Polarization::Ordinary;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records one check; the detail line lists every measured value.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [out of tolerance]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

PumpSpec gaussian(const PhasematchPoint& p, double fwhm) { return {p.pump_frequency(), fwhm, PumpLineshape::Gaussian}; }

// The three reference geometries vary the signal output mirror; idler mirrors stay at the demonstrator values.
struct Geometry {
  const char* label;
  double length_m;
  double r2;
};
constexpr Geometry kFig6[] = {{"10mm/0.95", 10e-3, 0.95}, {"70mm/0.95", 70e-3, 0.95}, {"10mm/0.70", 10e-3, 0.70}};

SourceSpec randomized_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(1e-3, 100e-3), refl(0.5, 0.999), loss(0.0, 0.3);
  SourceSpec s = demonstrator();
  s.length_m = len(rng);
  s.mirrors_signal = {refl(rng), refl(rng)};
  s.mirrors_idler = {refl(rng), refl(rng)};
  s.loss_signal_db_per_cm = loss(rng);
  s.loss_idler_db_per_cm = loss(rng);
  return s;
}

void criterion_1(Outcome& o) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> sig(800e-9, 1000e-9), temp(100.0, 200.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const SourceSpec s = randomized_spec(rng);
    const PhasematchPoint p = PhasematchPoint::at(s, kDemoPump, kSpeedOfLight / sig(rng), temp(rng));
    const double ratio = pm_bandwidth_estimate(s, p) / cluster_spacing_estimate(s, p);
    worst = std::max(worst, std::abs(ratio - 5.56 / kPi));
  }
  o.check(worst <= 1e-9, "max |ratio - 5.56/pi| = " + fmt("%.3g", worst) + " over 100 specs (tol 1e-9)");
}

void criterion_2(Outcome& o) {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int n = 0;
  while (n < 50) {
    const SourceSpec s = randomized_spec(rng);
    const Polarization pol = n % 2 ? Polarization::Extraordinary : O;
    if (finesse(s, pol, kDemoT) <= 20.0) continue;
    const double c = nearest_resonance(s, pol, pol == O ? 336.8e12 : 226.7e12, kDemoT);
    const double fsr = free_spectral_range(s, pol, c, kDemoT);
    const double numeric = scanned_fwhm(s, pol, c, fsr, kDemoT, 200000);
    worst = std::max(worst, std::abs(resonance_linewidth(s, pol, c, kDemoT) / numeric - 1.0));
    ++n;
  }
  o.check(worst <= 0.01, "max relative linewidth error = " + fmt("%.3g", worst) + " over 50 specs with finesse > 20 (tol 1%)");
}

double gram_schmidt_number(const Eigen::MatrixXd& j) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j * j.transpose());
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return ev.sum() * ev.sum() / ev.squaredNorm();
}

void criterion_3(Outcome& o) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(2, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_sep = 0.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd m(dim(rng), dim(rng));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    worst = std::max(worst, std::abs(schmidt_number(m) - gram_schmidt_number(m)));
    const Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(m.rows(), [&](Eigen::Index) { return u(rng); });
    const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(m.cols(), [&](Eigen::Index) { return u(rng); });
    worst_sep = std::max(worst_sep, std::abs(schmidt_number(Eigen::MatrixXd(a * b.transpose())) - 1.0));
  }
  o.check(worst <= 1e-9, "max |K_svd - K_gram| = " + fmt("%.3g", worst) + " (tol 1e-9)");
  o.check(worst_sep <= 1e-6, "max |K_separable - 1| = " + fmt("%.3g", worst_sep) + " (tol 1e-6)");
}

void criterion_4(Outcome& o) {
  const PhasematchPoint& p = demonstrator_setpoint();
  const double dc = cluster_spacing_estimate(demonstrator(), p);
  const Interval w = Interval::around(p.signal_frequency(), 1.5 * dc);
  const SignalSpectrum s = signal_spectrum(demonstrator(), p.pump_frequency(), kDemoT, w,
                                           required_spectrum_points(demonstrator(), kDemoT, w));
  const ClusterReport r = detect_clusters(s, demonstrator());
  o.check(within(r.central_fraction, 0.90, 0.05), "central fraction = " + fmt("%.4f", r.central_fraction) + " (0.90 +- 0.05)");
  const std::size_t c = r.central_cluster_index;
  const bool has_sides = c > 0 && c + 1 < r.clusters.size();
  o.check(has_sides, std::to_string(r.clusters.size()) + " clusters detected");
  if (has_sides) {
    const double lo = r.clusters[c].center - r.clusters[c - 1].center;
    const double hi = r.clusters[c + 1].center - r.clusters[c].center;
    o.check(within(lo / dc, 1.0, 0.1) && within(hi / dc, 1.0, 0.1),
            "side clusters at -" + fmt("%.2f", lo / 1e9) + " / +" + fmt("%.2f", hi / 1e9) + " GHz vs " + fmt("%.2f", dc / 1e9) +
                " GHz (+-10%)");
  }
}

void criterion_5(Outcome& o) {
  const PhasematchPoint& p = demonstrator_setpoint();
  StabilityOptions opt;
  opt.signal_hint_hz = p.signal_frequency();
  const auto [pw, tw] = stability_windows(demonstrator(), p.pump_frequency(), kDemoT, opt);
  o.check(within(pw.halfwidth / 1e6, 100.0, 50.0), "pump halfwidth = " + fmt("%.1f", pw.halfwidth / 1e6) + " MHz (100 +- 50%)");
  // First hop on a 5 MHz detuning grid over +-600 MHz.
  std::vector<double> det;
  for (int k = -120; k <= 120; ++k) det.push_back(5e6 * k);
  const double dc = cluster_spacing_estimate(demonstrator(), p);
  const Interval w = Interval::around(p.signal_frequency(), 0.5 * dc);
  const PeakTrack t = pump_detuning_map(demonstrator(), p.pump_frequency(), kDemoT, det, w,
                                        required_spectrum_points(demonstrator(), kDemoT, w));
  double first = std::numeric_limits<double>::infinity();
  for (std::size_t k : t.hops) first = std::min(first, std::abs(0.5 * (det[k] + det[k - 1])));
  o.check(within(first / 1e6, 300.0, 150.0), "first pump-map hop at |detuning| = " + fmt("%.1f", first / 1e6) + " MHz (300 +- 50%)");
  o.check(within(tw.halfwidth * 1e3, 5.0, 2.5), "temperature halfwidth = " + fmt("%.2f", tw.halfwidth * 1e3) + " mK (5 +- 50%)");
}

void criterion_6(Outcome& o) {
  const double nu = kSpeedOfLight / 890e-9;
  const double gamma = resonance_linewidth(demonstrator(), O, nu, kDemoT);
  o.check(gamma >= 33e6 && gamma <= 99e6, "linewidth at 890 nm = " + fmt("%.2f", gamma / 1e6) + " MHz (in [33, 99])");
  const double c = nearest_resonance(demonstrator(), O, nu, kDemoT);
  const double numeric = scanned_fwhm(demonstrator(), O, c, free_spectral_range(demonstrator(), O, c, kDemoT), kDemoT);
  const double rel = std::abs(resonance_linewidth(demonstrator(), O, c, kDemoT) / numeric - 1.0);
  o.check(rel <= 0.01, "dense-scan FWHM " + fmt("%.3f", numeric / 1e6) + " MHz, relative error " + fmt("%.2g", rel) + " (tol 1%)");
}

double purity_at(const SourceSpec& s, const PumpSpec& shape) {
  const PhasematchPoint p = double_resonance_setpoint(s, kDemoPump, kDemoT);
  PumpSpec pump = shape;
  pump.central_frequency = p.pump_frequency();
  return setpoint_purity(s, p, pump).total_purity;
}

void criterion_7(Outcome& o) {
  const PumpSpec g{0.0, 100e6, PumpLineshape::Gaussian};
  const double targets[] = {0.81, 0.72, 0.24};
  for (int k = 0; k < 3; ++k) {
    const double pur = purity_at(with_geometry(demonstrator(), kFig6[k].length_m, kFig6[k].r2), g);
    o.check(within(pur, targets[k], 0.08), std::string("P(") + kFig6[k].label + ") = " + fmt("%.3f", pur) + " (" +
                                               fmt("%.2f", targets[k]) + " +- 0.08)");
  }
  const double demo = purity_at(demonstrator(), g);
  o.check(within(demo, 0.95, 0.05), "P(demonstrator, 100 MHz) = " + fmt("%.3f", demo) + " (0.95 +- 0.05)");
  const double mono = purity_at(demonstrator(), {0.0, 0.0, PumpLineshape::Monochromatic});
  o.check(within(mono, 0.50, 0.10), "P(demonstrator, monochromatic) = " + fmt("%.3f", mono) + " (0.50 +- 0.10)");
}

void criterion_8(Outcome& o) {
  std::vector<double> sigmas;
  for (int k = 0; k <= 40; ++k) sigmas.push_back(5e6 * std::pow(10.0, k / 16.0));  // 5 MHz .. 1.6 GHz
  for (const Geometry& g : kFig6) {
    const SourceSpec s = with_geometry(demonstrator(), g.length_m, g.r2);
    const PhasematchPoint p = double_resonance_setpoint(s, kDemoPump, kDemoT);
    const PumpBandwidthScan scan = purity_vs_pump_bandwidth(s, p, sigmas);
    const double two_gamma = 2.0 * scan.signal_linewidth;
    if (!scan.crossover) {
      o.check(false, std::string(g.label) + ": S never reaches 0.9");
      continue;
    }
    const double ratio = *scan.crossover / two_gamma;
    o.check(ratio >= 1.0 / 1.5 && ratio <= 1.5, std::string(g.label) + ": crossover " + fmt("%.1f", *scan.crossover / 1e6) +
                                                    " MHz vs 2 Gamma_s = " + fmt("%.1f", two_gamma / 1e6) + " MHz");
  }
}

void criterion_9(Outcome& o) {
  const PumpSpec g{0.0, 100e6, PumpLineshape::Gaussian};
  double m[3];
  for (int k = 0; k < 3; ++k) {
    const SourceSpec s = with_geometry(demonstrator(), kFig6[k].length_m, kFig6[k].r2);
    const PhasematchPoint p = double_resonance_setpoint(s, kDemoPump, kDemoT);
    m[k] = setpoint_purity(s, p, gaussian(p, 100e6)).mode_excitation;
  }
  o.check(m[0] > m[1] && m[0] > m[2],
          "M = " + fmt("%.3f", m[0]) + " / " + fmt("%.3f", m[1]) + " / " + fmt("%.3f", m[2]) + " for 10mm/0.95, 70mm/0.95, 10mm/0.70");
  // Coarse map matching the shipped coarse config.
  const AxisRange lengths{2e-3, 80e-3, 5}, refl{0.70, 0.99, 7};
  const DesignMap pm = purity_map(demonstrator(), kDemoPump, kDemoT, lengths, refl, g);
  const DesignMap bw = bandwidth_map(demonstrator(), kSpeedOfLight / 890e-9, kDemoT, lengths, refl);
  double widest = 0.0;
  for (std::size_t i = 0; i < pm.lengths.size(); ++i)
    for (std::size_t j = 0; j < pm.reflectivities.size(); ++j)
      if (pm.values[i][j] > 0.95) widest = std::max(widest, bw.values[i][j]);
  o.check(within(widest / 1e6, 350.0, 70.0), "widest linewidth with M > 0.95 = " + fmt("%.1f", widest / 1e6) + " MHz (350 +- 20%)");
}

void criterion_10(Outcome& o) {
  const CotuningCoefficients c = cotuning_coefficients(demonstrator(), demonstrator_setpoint(), kDemoT);
  o.check(within(c.dT_dnu_s_c_per_ghz(), -0.157, 0.3 * 0.157), "dT/dnu_s = " + fmt("%.4f", c.dT_dnu_s_c_per_ghz()) + " C/GHz (-0.157 +- 30%)");
  o.check(within(c.dnu_p_dnu_s, 2.429, 0.3 * 2.429), "dnu_p/dnu_s = " + fmt("%.4f", c.dnu_p_dnu_s) + " (2.429 +- 30%)");
  std::vector<double> offsets;
  for (int k = 0; k <= 8; ++k) offsets.push_back(0.023e9 * std::pow(10.0, k / 4.0));
  const TuningSchedule s = fine_tune_schedule(demonstrator(), demonstrator_setpoint(), kDemoT, offsets, {false, 1e-4});
  double mx = 0, my = 0, sxy = 0, sxx = 0;
  std::vector<double> lx, ly;
  for (const TuningEntry& e : s.entries) {
    lx.push_back(std::log(e.signal_offset));
    ly.push_back(std::log(std::abs(e.temperature - e.predicted_temperature)));
  }
  for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k] / lx.size(), my += ly[k] / ly.size();
  for (std::size_t k = 0; k < lx.size(); ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
  const double slope = sxy / sxx;
  o.check(within(slope, 2.0, 0.2), "log-log slope of first-order error = " + fmt("%.3f", slope) + " (2 +- 0.2)");
}

void criterion_11(Outcome& o) {
  std::vector<double> offsets;
  for (int k = 0; k < 47; ++k) offsets.push_back(-2.3e9 + 4.6e9 * k / 46);
  const PhasematchPoint& p = demonstrator_setpoint();
  const TuningSchedule s = fine_tune_schedule(demonstrator(), p, kDemoT, offsets);
  const double fsr = free_spectral_range(demonstrator(), O, p.signal_frequency(), kDemoT);
  double worst = 0, worst_peak = 0;
  for (const TuningEntry& e : s.entries) {
    worst = std::max({worst, std::abs(e.residual_phase_s), std::abs(e.residual_phase_i)});
    worst_peak = std::max(worst_peak, std::abs(e.dominant_peak - p.signal_frequency() - e.signal_offset));
  }
  o.check(s.entries.size() == 47 && worst < 1e-4, std::to_string(s.entries.size()) + " entries, max residual phase " + fmt("%.2g", worst) + " rad (< 1e-4)");
  o.check(worst_peak < 0.5 * fsr, "max dominant-peak deviation " + fmt("%.3f", worst_peak / 1e6) + " MHz (no mode hop)");
}

void criterion_12(Outcome& o) {
  const BrightnessReport r = enhancement_factor(demonstrator(), demonstrator_setpoint(), kDemoT);
  o.check(r.relative_spectral_brightness >= 1000 && r.relative_spectral_brightness <= 3000,
          "relative spectral brightness = " + fmt("%.1f", r.relative_spectral_brightness) + " (in [1000, 3000])");
  const double b = spectral_brightness_estimate(demonstrator(), demonstrator_setpoint(), kDemoT, 15.0);
  o.check(b >= 1.5e4 && b <= 6e4, "estimate = " + fmt("%.4g", b) + " /(s mW MHz) (3e4 within x2)");
}

void criterion_13(Outcome& o) {
  struct Case {
    const char* name;
    double memory_nm, bandwidth_mhz, min_purity, length_m, r2, sigma_hz, p_target, p_tol, partner_nm, partner_tol;
  };
  const Case cases[] = {{"Cs", 852, 500, 0.90, 2.5e-3, 0.90, 1000e6, 0.940, 0.05, 1416, 15},
                        {"Tm", 795, 80, 0.90, 10e-3, 0.94, 250e6, 0.963, 0.05, 1608, 15},
                        {"Er", 1536, 50, 0.75, 80e-3, 0.98, 60e6, 0.753, 0.08, 814, 10}};
  for (const Case& c : cases) {
    MemoryTarget t;
    t.name = c.name;
    t.signal_wavelength_m = c.memory_nm * 1e-9;
    t.desired_bandwidth_hz = c.bandwidth_mhz * 1e6;
    t.minimum_total_purity = c.min_purity;
    const DesignResult r = evaluate_design(t, demonstrator(), c.length_m, c.r2, c.sigma_hz);
    const double partner = r.idler_wavelength_m * 1e9;
    o.check(within(r.purity.total_purity, c.p_target, c.p_tol),
            std::string(c.name) + " P = " + fmt("%.3f", r.purity.total_purity) + " (" + fmt("%.3f", c.p_target) + " +- " + fmt("%.2f", c.p_tol) + ")");
    o.check(within(partner, c.partner_nm, c.partner_tol),
            std::string(c.name) + " partner = " + fmt("%.1f", partner) + " nm (" + fmt("%.0f", c.partner_nm) + " +- " + fmt("%.0f", c.partner_tol) + ")");
    o.check(r.feasible, std::string(c.name) + (r.feasible ? " feasible" : " infeasible (" + r.binding_constraint + ", linewidth " +
                                                                              fmt("%.1f", r.memory_linewidth_hz / 1e6) + " MHz)"));
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void criterion_14(Outcome& o) {
  const fs::path config = fs::path(RESPDC_SOURCE_DIR) / "configs" / "quick.toml";
  const fs::path root = fs::temp_directory_path() / "respdc_acceptance_14";
  fs::remove_all(root);
  int identical = 0;
  for (const std::string& name : cli::kSubcommands) {
    // Both runs use the same output directory so resolved_config.toml is comparable.
    const fs::path out = root / name;
    const std::string cmd = std::string("\"") + RESPDC_CLI_PATH + "\" --config \"" + config.string() + "\" --out \"" +
                            out.string() + "\" " + name + " > /dev/null";
    std::map<std::string, std::string> first;
    bool ran = std::system(cmd.c_str()) == 0;
    if (ran) {
      for (const auto& entry : fs::directory_iterator(out)) first[entry.path().filename().string()] = slurp(entry.path());
      fs::remove_all(out);
      ran = std::system(cmd.c_str()) == 0;
    }
    bool same = ran && first.size() >= 2;
    if (ran) {
      std::size_t files = 0;
      for (const auto& entry : fs::directory_iterator(out)) {
        ++files;
        const auto it = first.find(entry.path().filename().string());
        if (it == first.end() || it->second != slurp(entry.path())) same = false;
      }
      same = same && files == first.size();
    }
    if (!same) o.check(false, name + (ran ? " differs between runs" : " failed to run"));
    else ++identical;
  }
  o.check(identical == static_cast<int>(cli::kSubcommands.size()),
          std::to_string(identical) + "/" + std::to_string(cli::kSubcommands.size()) + " subcommands byte-identical");
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "Criterion number (1-14); all when omitted")->check(CLI::Range(1, 14));
  CLI11_PARSE(app, argc, argv);

  const std::function<void(Outcome&)> table[] = {criterion_1,  criterion_2,  criterion_3,  criterion_4, criterion_5,
                                                 criterion_6,  criterion_7,  criterion_8,  criterion_9, criterion_10,
                                                 criterion_11, criterion_12, criterion_13, criterion_14};
  bool all = true;
  for (int n = 1; n <= 14; ++n) {
    if (criterion != 0 && n != criterion) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      table[n - 1](o);
    } catch (const std::exception& e) {
      o.check(false, std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " (" << fmt("%.1f", secs) << " s) "
              << o.detail.str() << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
