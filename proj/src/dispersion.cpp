#include "respdc/dispersion.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "respdc/error.hpp"
#include "respdc/toml.hpp"
#include "respdc/units.hpp"

#ifndef RESPDC_DEFAULT_DATA_DIR
#define RESPDC_DEFAULT_DATA_DIR "data"
#endif

namespace respdc {

namespace {

std::string format_bound(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void check_temperature(double temperature_c) {
  if (!(temperature_c >= kMinTemperatureC))
    throw DomainError("temperature " + format_bound(temperature_c) + " C below lower bound " +
                      format_bound(kMinTemperatureC) + " C");
  if (!(temperature_c <= kMaxTemperatureC))
    throw DomainError("temperature " + format_bound(temperature_c) + " C above upper bound " +
                      format_bound(kMaxTemperatureC) + " C");
}

void check_wavelength(const SellmeierCoefficients& c, Polarization pol, double wavelength_m) {
  if (!(wavelength_m >= c.wavelength_min_m))
    throw DomainError(std::string(to_string(pol)) + " wavelength " + format_bound(wavelength_m * 1e9) +
                      " nm below validity bound " + format_bound(c.wavelength_min_m * 1e9) + " nm");
  if (!(wavelength_m <= c.wavelength_max_m))
    throw DomainError(std::string(to_string(pol)) + " wavelength " + format_bound(wavelength_m * 1e9) +
                      " nm above validity bound " + format_bound(c.wavelength_max_m * 1e9) + " nm");
}

double sellmeier_index(const SellmeierCoefficients& c, double wavelength_m, double temperature_c) {
  const double lam = wavelength_m * 1e6;
  const double lam2 = lam * lam;
  const double f = (temperature_c - c.t0_c) * (temperature_c + c.t0_c + c.f_offset);
  double n2 = c.a1 + c.b1 * f - c.a6 * lam2;
  if (c.a2 != 0.0 || c.b2 != 0.0) {
    const double pole = c.a3 + c.b3 * f;
    n2 += (c.a2 + c.b2 * f) / (lam2 - pole * pole);
  }
  if (c.a4 != 0.0 || c.b4 != 0.0) n2 += (c.a4 + c.b4 * f) / (lam2 - c.a5 * c.a5);
  if (!(n2 > 0.0)) throw DomainError("Sellmeier form yields n^2 <= 0 at " + format_bound(wavelength_m * 1e9) + " nm");
  return std::sqrt(n2);
}

SellmeierCoefficients read_coefficients(const toml::Table& t) {
  SellmeierCoefficients c;
  c.a1 = t.number("a1");
  c.a2 = t.number_or("a2", 0.0);
  c.a3 = t.number_or("a3", 0.0);
  c.a4 = t.number_or("a4", 0.0);
  c.a5 = t.number_or("a5", 0.0);
  c.a6 = t.number_or("a6", 0.0);
  c.b1 = t.number_or("b1", 0.0);
  c.b2 = t.number_or("b2", 0.0);
  c.b3 = t.number_or("b3", 0.0);
  c.b4 = t.number_or("b4", 0.0);
  c.t0_c = t.number("reference_temperature_c");
  c.f_offset = t.number("temperature_offset_c");
  c.wavelength_min_m = t.number("wavelength_min_um") * 1e-6;
  c.wavelength_max_m = t.number("wavelength_max_um") * 1e-6;
  c.citation = t.string_or("citation", "");
  if (!(c.wavelength_min_m > 0.0 && c.wavelength_max_m > c.wavelength_min_m))
    throw ConfigError(t.source + ": [" + t.name + "] invalid validity range");
  return c;
}

}  // namespace

std::string_view to_string(Polarization pol) {
  return pol == Polarization::Ordinary ? "ordinary" : "extraordinary";
}

Polarization parse_polarization(std::string_view text) {
  if (text == "ordinary" || text == "o") return Polarization::Ordinary;
  if (text == "extraordinary" || text == "e") return Polarization::Extraordinary;
  throw ConfigError("unknown polarization '" + std::string(text) + "'");
}

SellmeierCoefficients SellmeierCoefficients::constant(double n0) {
  SellmeierCoefficients c;
  c.a1 = n0 * n0;
  c.wavelength_min_m = 1e-9;
  c.wavelength_max_m = 1.0;
  c.citation = "constant index";
  return c;
}

DispersionModel::DispersionModel(SellmeierCoefficients ordinary, SellmeierCoefficients extraordinary,
                                 double offset_ordinary, double offset_extraordinary)
    : ordinary_(std::move(ordinary)),
      extraordinary_(std::move(extraordinary)),
      offset_ordinary_(offset_ordinary),
      offset_extraordinary_(offset_extraordinary) {}

DispersionModel DispersionModel::constant(double n_ordinary, double n_extraordinary) {
  DispersionModel m(SellmeierCoefficients::constant(n_ordinary), SellmeierCoefficients::constant(n_extraordinary));
  m.source_ = "constant";
  return m;
}

DispersionModel DispersionModel::load(const std::filesystem::path& path) {
  toml::Table root = toml::parse_file(path);
  const toml::Table* o = root.subtable("ordinary");
  const toml::Table* e = root.subtable("extraordinary");
  if (!o || !e) throw ConfigError(path.string() + ": needs [ordinary] and [extraordinary] tables");
  DispersionModel m(read_coefficients(*o), read_coefficients(*e));
  m.source_ = path.string();
  return m;
}

const SellmeierCoefficients& DispersionModel::coefficients(Polarization pol) const {
  return pol == Polarization::Ordinary ? ordinary_ : extraordinary_;
}

double DispersionModel::mode_offset(Polarization pol) const {
  return pol == Polarization::Ordinary ? offset_ordinary_ : offset_extraordinary_;
}

DispersionModel DispersionModel::with_mode_offset(Polarization pol, double offset) const {
  DispersionModel m = *this;
  (pol == Polarization::Ordinary ? m.offset_ordinary_ : m.offset_extraordinary_) = offset;
  return m;
}

std::filesystem::path data_directory() {
  if (const char* env = std::getenv("RESPDC_DATA_DIR"); env && *env) return env;
  return RESPDC_DEFAULT_DATA_DIR;
}

const DispersionModel& default_dispersion_model() {
  static std::once_flag once;
  static DispersionModel model;
  std::call_once(once, [] { model = DispersionModel::load(data_directory() / kDefaultSellmeierFile); });
  return model;
}

double refractive_index(const DispersionModel& model, Polarization pol, double wavelength_m, double temperature_c) {
  const SellmeierCoefficients& c = model.coefficients(pol);
  check_temperature(temperature_c);
  check_wavelength(c, pol, wavelength_m);
  return sellmeier_index(c, wavelength_m, temperature_c) + model.mode_offset(pol);
}

double group_index(const DispersionModel& model, Polarization pol, double wavelength_m, double temperature_c,
                   double relative_step) {
  const SellmeierCoefficients& c = model.coefficients(pol);
  check_temperature(temperature_c);
  check_wavelength(c, pol, wavelength_m);
  const double h = relative_step * wavelength_m;
  if (wavelength_m - h < c.wavelength_min_m || wavelength_m + h > c.wavelength_max_m)
    throw DomainError(std::string(to_string(pol)) + " wavelength " + format_bound(wavelength_m * 1e9) +
                      " nm within one derivative step of the validity boundary");
  auto n = [&](double lam) { return sellmeier_index(c, lam, temperature_c); };
  const double d1 = (n(wavelength_m + h) - n(wavelength_m - h)) / (2.0 * h);
  const double d2 = (n(wavelength_m + 0.5 * h) - n(wavelength_m - 0.5 * h)) / h;
  const double dn = (4.0 * d2 - d1) / 3.0;
  return n(wavelength_m) + model.mode_offset(pol) - wavelength_m * dn;
}

double group_index(const DispersionModel& model, Polarization pol, double wavelength_m, double temperature_c) {
  return group_index(model, pol, wavelength_m, temperature_c, 1e-4);
}

double propagation_constant(const DispersionModel& model, Polarization pol, double frequency_hz,
                            double temperature_c) {
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be positive");
  const double n = refractive_index(model, pol, kSpeedOfLight / frequency_hz, temperature_c);
  return kTwoPi * frequency_hz * n / kSpeedOfLight;
}

double sample_length(const ThermalModel& thermal, double length0_m, double temperature_c) {
  if (!(length0_m > 0.0)) throw DomainError("sample length must be positive");
  return length0_m * thermal.length_factor(temperature_c);
}

}  // namespace respdc
