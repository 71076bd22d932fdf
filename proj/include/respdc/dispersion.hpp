#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace respdc {

enum class Polarization { Ordinary, Extraordinary };

std::string_view to_string(Polarization pol);
Polarization parse_polarization(std::string_view text);

inline constexpr double kMinTemperatureC = 0.0;
inline constexpr double kMaxTemperatureC = 250.0;

// Generalized temperature-dependent Sellmeier form (wavelength in um, T in C):
//   n^2 = a1 + b1 f + (a2 + b2 f) / (lam^2 - (a3 + b3 f)^2)
//            + (a4 + b4 f) / (lam^2 - a5^2) - a6 lam^2
//   f   = (T - t0) (T + t0 + f_offset)
// Both the Edwards-Lawrence and the Jundt congruent LiNbO3 sets fit this shape.
struct SellmeierCoefficients {
  double a1 = 1.0, a2 = 0.0, a3 = 0.0, a4 = 0.0, a5 = 0.0, a6 = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
  double t0_c = 24.5;
  double f_offset = 546.0;
  double wavelength_min_m = 0.3e-6;
  double wavelength_max_m = 5.0e-6;
  std::string citation;

  // n = n0 everywhere, all dispersion and thermo-optic terms zeroed.
  static SellmeierCoefficients constant(double n0);
};

// Immutable map (polarization, wavelength, temperature) -> effective index.
class DispersionModel {
 public:
  DispersionModel() : DispersionModel(SellmeierCoefficients::constant(2.0), SellmeierCoefficients::constant(2.0)) {}
  DispersionModel(SellmeierCoefficients ordinary, SellmeierCoefficients extraordinary, double offset_ordinary = 0.0,
                  double offset_extraordinary = 0.0);

  static DispersionModel constant(double n_ordinary, double n_extraordinary);
  // Reads one [ordinary] and one [extraordinary] table.
  static DispersionModel load(const std::filesystem::path& path);

  const SellmeierCoefficients& coefficients(Polarization pol) const;
  double mode_offset(Polarization pol) const;
  DispersionModel with_mode_offset(Polarization pol, double offset) const;
  const std::string& source() const { return source_; }

 private:
  SellmeierCoefficients ordinary_;
  SellmeierCoefficients extraordinary_;
  double offset_ordinary_ = 0.0;
  double offset_extraordinary_ = 0.0;
  std::string source_ = "builtin";
};

struct ThermalModel {
  double expansion_coefficient = 1.5e-5;  // 1/K
  double reference_temperature_c = 148.14;

  double length_factor(double temperature_c) const {
    return 1.0 + expansion_coefficient * (temperature_c - reference_temperature_c);
  }
};

// Directory holding the Sellmeier data file; RESPDC_DATA_DIR overrides the compiled default.
std::filesystem::path data_directory();
inline constexpr const char* kDefaultSellmeierFile = "sellmeier_congruent_ln.toml";
// Loads data_directory()/kDefaultSellmeierFile once and caches it.
const DispersionModel& default_dispersion_model();

double refractive_index(const DispersionModel& model, Polarization pol, double wavelength_m, double temperature_c);
double group_index(const DispersionModel& model, Polarization pol, double wavelength_m, double temperature_c);
// Group index with an explicit relative step (exposed for convergence tests).
double group_index(const DispersionModel& model, Polarization pol, double wavelength_m, double temperature_c,
                   double relative_step);
double propagation_constant(const DispersionModel& model, Polarization pol, double frequency_hz,
                            double temperature_c);
double sample_length(const ThermalModel& thermal, double length0_m, double temperature_c);

}  // namespace respdc
