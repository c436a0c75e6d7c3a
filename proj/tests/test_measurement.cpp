#include <doctest.h>

#include <cmath>
#include <numeric>

#include "toa/error.hpp"
#include "toa/measurement.hpp"

using namespace toa;

namespace {

const Grid1D& grid() {
  static const Grid1D g(-40.0, 40.0, 1024);
  return g;
}

WaveFunction packet() { return make_gaussian(grid(), {-15.0, 5.0, 1.0, 1.0}); }

MeasurementSchedule schedule(double delta) { return {0.0, delta, 6.0, EvolutionParams{5e-4, 0, 1.0}}; }

}  // namespace

TEST_CASE("repeated measurement at delta = 0.1 (frozen)") {
  const ArrivalSeries s = repeated_measurement_arrival(packet(), schedule(0.1));
  CHECK(s.detected() == doctest::Approx(0.923082403968715).epsilon(1e-9));
  const double total = std::accumulate(s.probabilities.begin(), s.probabilities.end(), s.residual);
  CHECK(std::abs(total - 1.0) < 1e-9);
  CHECK(s.times.size() == schedule(0.1).count());
}

TEST_CASE("frequent looks suppress detection") {
  const auto pts = zeno_scan(packet(), 0.0, {0.5, 0.05, 0.005}, 6.0, EvolutionParams{5e-4, 0, 1.0});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].detection > pts[1].detection);
  CHECK(pts[1].detection > pts[2].detection);
}

TEST_CASE("schedule validation") {
  MeasurementSchedule s = schedule(0.1);
  s.evolution.dt = 0.03;  // not a divisor of delta
  CHECK_THROWS_AS(s.validate(), Error);
  s = schedule(-1.0);
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK_THROWS(zeno_scan(packet(), 0.0, {0.1, 0.2}, 6.0, EvolutionParams{5e-4, 0, 1.0}));
}

TEST_CASE("state already past the detector is rejected") {
  const WaveFunction psi = make_gaussian(grid(), {5.0, 5.0, 1.0, 1.0});
  try {
    repeated_measurement_arrival(psi, schedule(0.1));
    FAIL("expected support violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SupportViolation);
  }
}

TEST_CASE("projector split is exact and orthogonal") {
  const WaveFunction psi = free_evolve(packet(), 3.0, 1.0);
  const ProjectedParts parts = project_plus(psi, 0.0);
  CHECK(parts.inside.norm2() + parts.outside.norm2() == doctest::Approx(psi.norm2()).epsilon(1e-13));
  CHECK(std::abs(inner(parts.inside, parts.outside)) < 1e-15);
  const std::size_t cut = grid().nearest_index(0.0);
  CHECK(std::abs(parts.inside[cut - 1]) == 0.0);
  CHECK(std::abs(parts.outside[cut]) == 0.0);
}

TEST_CASE("interpolation reproduces grid samples") {
  const WaveFunction psi = to_position(free_evolve(packet(), 1.0, 1.0));
  for (std::size_t i : {100u, 300u, 512u, 700u}) CHECK(std::abs(interpolate(psi, grid().x(i)) - psi[i]) < 1e-12);
}

TEST_CASE("current at the detector and half-line weight (frozen)") {
  const WaveFunction psi = free_evolve(packet(), 3.0, 1.0);
  CHECK(probability_current(psi, 0.0, 1.0) == doctest::Approx(1.10646680610608).epsilon(1e-10));
  CHECK(half_line_weight(psi, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("continuity: dP+/dt equals the current") {
  for (double t : {1.0, 2.5, 4.0}) {
    const WaveFunction psi = free_evolve(packet(), t, 1.0);
    CHECK(std::abs(half_line_weight_rate(psi, 0.0, 1.0) - probability_current(psi, 0.0, 1.0)) < 1e-8);
  }
}

TEST_CASE("integrated current equals transmitted weight") {
  std::vector<double> times(601);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = 0.01 * static_cast<double>(i);
  const std::vector<double> j = current_series(packet(), 0.0, times, 1.0);
  double integral = 0.0;
  for (std::size_t i = 1; i < j.size(); ++i) integral += 0.005 * (j[i] + j[i - 1]);
  const double gained = half_line_weight(free_evolve(packet(), 6.0, 1.0), 0.0) - half_line_weight(packet(), 0.0);
  CHECK(integral == doctest::Approx(gained).epsilon(1e-5));
}

TEST_CASE("presence distribution is normalized (frozen mean)") {
  const PresenceDistribution d = presence_distribution(packet(), 0.0, 0.0, 8.0, 801, 1.0);
  double total = 0.0;
  for (double v : d.density) total += v * d.bin_width;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.mean_time() == doctest::Approx(3.06324601348782).epsilon(1e-9));
}

TEST_CASE("presence window must cover the passage") {
  try {
    presence_distribution(packet(), 0.0, 0.0, 2.0, 201, 1.0);
    FAIL("expected window error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowTooSmall);
  }
}

TEST_CASE("projectors at different times do not commute") {
  CHECK(projector_commutator_norm(packet(), 0.0, 1.5, 2.5, 1.0) > 1e-3);
  CHECK(projector_commutator_norm(packet(), 0.0, 2.0, 2.0, 1.0) < 1e-12);
}
