#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "respdc/error.hpp"
#include "respdc/tuning.hpp"

using namespace respdc;
using namespace respdc::test;

namespace {
constexpr auto O = Polarization::Ordinary;
constexpr auto E = Polarization::Extraordinary;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = a + (b - a) * k / (n - 1);
  return v;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= x.size();
  my /= x.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return sxy / sxx;
}
}  // namespace

TEST_CASE("round-trip phase of a dispersion-free cavity") {
  SourceSpec s = constant_spec(2.0, 7.5e-3, {0.9, 0.9});
  s.thermal.reference_temperature_c = 25.0;
  const double phi = roundtrip_phase(s, O, 10e12, 25.0);
  CHECK(phi == doctest::Approx(kTwoPi * 2.0 * 10e12 * 2.0 * 7.5e-3 / kSpeedOfLight).epsilon(1e-13));
  CHECK(phi / kTwoPi == doctest::Approx(1e3).epsilon(1e-3));  // 2 n nu (2L) / c = 1000 cycles with c = 3e8
  const PhasePartials pp = phase_partials(s, O, 10e12, 25.0);
  CHECK(pp.dphi_domega == doctest::Approx(2.0 * 2.0 * 7.5e-3 / kSpeedOfLight).epsilon(1e-6));
}

TEST_CASE("resonances sit on multiples of 2 pi and the slope matches the group index") {
  const SourceSpec& s = demonstrator();
  for (Polarization pol : {O, E}) {
    const double nu = pol == O ? 336.84e12 : 226.7e12;
    const double c = nearest_resonance(s, pol, nu, kDemoT);
    CHECK(std::abs(phase_residual(s, pol, c, kDemoT)) < 1e-6);
    const double d = 1e6;
    const double fd = (roundtrip_phase(s, pol, c + d, kDemoT) - roundtrip_phase(s, pol, c - d, kDemoT)) / (2 * d);
    const double ng = group_index(s.dispersion, pol, kSpeedOfLight / c, kDemoT);
    CHECK(fd == doctest::Approx(2 * kTwoPi * ng * s.length_at(kDemoT) / kSpeedOfLight).epsilon(1e-3));
  }
}

TEST_CASE("thermal expansion enters the temperature derivative") {
  SourceSpec with = demonstrator();
  SourceSpec without = with;
  without.thermal.expansion_coefficient = 0.0;
  const double nu = demonstrator_setpoint().signal_frequency();
  const double T = with.thermal.reference_temperature_c;
  const double diff = phase_partials(with, O, nu, T).dphi_dT - phase_partials(without, O, nu, T).dphi_dT;
  const double n = propagation_constant(with.dispersion, O, nu, T) * kSpeedOfLight / (kTwoPi * nu);
  CHECK(diff == doctest::Approx(2.0 * kTwoPi * nu * n * with.length_m * with.thermal.expansion_coefficient / kSpeedOfLight)
                    .epsilon(1e-4));
}

TEST_CASE("partial derivatives converge under step halving") {
  const PhasematchPoint& p = demonstrator_setpoint();
  for (Polarization pol : {O, E}) {
    const double nu = pol == O ? p.signal_frequency() : p.idler_frequency();
    const PhasePartials a = phase_partials(demonstrator(), pol, nu, kDemoT, 1.0);
    const PhasePartials b = phase_partials(demonstrator(), pol, nu, kDemoT, 0.5);
    CHECK(std::abs(a.dphi_domega - b.dphi_domega) / std::abs(b.dphi_domega) < 1e-5);
    CHECK(std::abs(a.dphi_dT - b.dphi_dT) / std::abs(b.dphi_dT) < 1e-5);
  }
}

TEST_CASE("demonstrator co-tuning coefficients") {
  const CotuningCoefficients c = cotuning_coefficients(demonstrator(), demonstrator_setpoint(), kDemoT);
  CHECK(c.dT_dnu_s_c_per_ghz() == doctest::Approx(-0.157).epsilon(0.3));
  CHECK(c.dnu_p_dnu_s == doctest::Approx(2.429).epsilon(0.3));
  // finite-difference oracle on the Sellmeier data
  CHECK(c.dT_dnu_s_c_per_ghz() == doctest::Approx(-0.1617).epsilon(5e-3));
  CHECK(c.dnu_p_dnu_s == doctest::Approx(2.4411).epsilon(5e-3));
}

TEST_CASE("identical dispersion at degeneracy gives a pump slope of exactly two") {
  SourceSpec s = demonstrator();
  const auto& ord = s.dispersion.coefficients(O);
  s.dispersion = DispersionModel(ord, ord, s.dispersion.mode_offset(O), s.dispersion.mode_offset(O));
  s.mirrors_idler = s.mirrors_signal;
  s.loss_idler_db_per_cm = s.loss_signal_db_per_cm;
  const double nu = nearest_resonance(s, O, kSpeedOfLight / 1064e-9, kDemoT);
  const PhasematchPoint p = PhasematchPoint::at(s, 2 * nu, nu, kDemoT);
  CHECK(cotuning_coefficients(s, p, kDemoT).dnu_p_dnu_s == 2.0);
}

TEST_CASE("temperature-independent phase is singular") {
  SourceSpec s = constant_spec(2.2, 10e-3, {0.9, 0.9});
  s.thermal.expansion_coefficient = 0.0;
  const PhasematchPoint p = PhasematchPoint::at(s, 500e12, 300e12, 148.14);
  CHECK_THROWS_AS(cotuning_coefficients(s, p, 148.14), DomainError);
}

TEST_CASE("fine-tune schedule over two signal FSR fractions") {
  const SourceSpec& s = demonstrator();
  const PhasematchPoint& p = demonstrator_setpoint();
  const std::vector<double> offsets = linspace(-2.3e9, 2.3e9, 47);
  const TuningSchedule sch = fine_tune_schedule(s, p, kDemoT, offsets);
  REQUIRE(sch.entries.size() == 47);
  const TuningEntry& mid = sch.entries[23];
  CHECK(mid.signal_offset == 0.0);
  CHECK(mid.temperature == kDemoT);
  CHECK(mid.pump_frequency == p.pump_frequency());
  const double fsr = free_spectral_range(s, O, p.signal_frequency(), kDemoT);
  for (const TuningEntry& e : sch.entries) {
    CHECK(std::abs(e.residual_phase_s) < 1e-4);
    CHECK(std::abs(e.residual_phase_i) < 1e-4);
    CHECK(std::abs(e.dominant_peak - (p.signal_frequency() + e.signal_offset)) < 0.5 * fsr);
  }
  const TuningEntry& hi = sch.entries.back();
  const TuningEntry& lo = sch.entries.front();
  CHECK(hi.temperature - kDemoT == doctest::Approx(-0.36).epsilon(0.3));
  CHECK(lo.temperature - kDemoT == doctest::Approx(0.36).epsilon(0.3));
  CHECK((hi.pump_frequency - p.pump_frequency()) / 1e9 == doctest::Approx(5.6).epsilon(0.3));
  CHECK((lo.pump_frequency - p.pump_frequency()) / 1e9 == doctest::Approx(-5.6).epsilon(0.3));
}

TEST_CASE("refining the offset grid interpolates the coarse schedule") {
  const FineTuneOptions opt{false, 1e-4};
  const TuningSchedule coarse = fine_tune_schedule(demonstrator(), demonstrator_setpoint(), kDemoT, linspace(-2e9, 2e9, 21), opt);
  const TuningSchedule fine = fine_tune_schedule(demonstrator(), demonstrator_setpoint(), kDemoT, linspace(-2e9, 2e9, 41), opt);
  for (std::size_t k = 0; k + 1 < coarse.entries.size(); ++k) {
    const double interp = 0.5 * (coarse.entries[k].pump_frequency + coarse.entries[k + 1].pump_frequency);
    CHECK(std::abs(fine.entries[2 * k + 1].pump_frequency - interp) < 1e6);
    CHECK(std::abs(fine.entries[2 * k].pump_frequency - coarse.entries[k].pump_frequency) < 1e3);
  }
}

TEST_CASE("first-order prediction error grows quadratically") {
  std::vector<double> offsets, err;
  for (int k = 0; k <= 8; ++k) offsets.push_back(0.023e9 * std::pow(10.0, k / 4.0));
  const TuningSchedule sch = fine_tune_schedule(demonstrator(), demonstrator_setpoint(), kDemoT, offsets, {false, 1e-4});
  for (const TuningEntry& e : sch.entries) err.push_back(std::abs(e.temperature - e.predicted_temperature));
  CHECK(log_slope(offsets, err) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("fine-tune input validation") {
  const PhasematchPoint& p = demonstrator_setpoint();
  const PhasematchPoint off(p.pump_frequency() + 1e9, p.signal_frequency() + 1e9, kDemoT, p.poling_period());
  CHECK_THROWS_AS(fine_tune_schedule(demonstrator(), off, kDemoT, {0.0}), DomainError);
  CHECK_THROWS_AS(fine_tune_schedule(demonstrator(), p, kDemoT, {6e9}, {false, 1e-4}), DomainError);
}
