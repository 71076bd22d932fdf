// Qualitative claims about the demonstrator that the model is checked against but does not
// necessarily reproduce; registered as their own ctest so unit results stay readable.

#include <doctest.h>

#include "helpers.hpp"
#include "respdc/design.hpp"
#include "respdc/spectrum.hpp"

using namespace respdc;
using namespace respdc::test;

TEST_SUITE("reference") {

TEST_CASE("GHz linewidths need crystals shorter than 5 mm") {
  const DesignMap m = bandwidth_map(demonstrator(), kSpeedOfLight / 890e-9, kDemoT, {1e-3, 100e-3, 100}, {0.5, 0.995, 100});
  double longest = 0.0;
  for (std::size_t i = 0; i < m.lengths.size(); ++i)
    for (std::size_t j = 0; j < m.reflectivities.size(); ++j)
      if (m.values[i][j] > 1e9) longest = std::max(longest, m.lengths[i]);
  CHECK(longest > 0.0);
  CHECK(longest < 5e-3);
}

TEST_CASE("signal peak moves to higher frequency as the temperature rises") {
  const PhasematchPoint& p = demonstrator_setpoint();
  std::vector<double> temps;
  for (int k = -40; k <= 40; ++k) temps.push_back(kDemoT + 1e-3 * k);
  const Interval w = Interval::around(p.signal_frequency(), 0.5 * cluster_spacing_estimate(demonstrator(), p));
  const PeakTrack t = temperature_map(demonstrator(), p.pump_frequency(), temps, w,
                                      required_spectrum_points(demonstrator(), kDemoT, w));
  REQUIRE(!t.drift_slopes.empty());
  CHECK(t.overall_slope > 0.0);
  for (double s : t.drift_slopes) CHECK(s > 0.0);
}

}  // TEST_SUITE
