#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "toa/error.hpp"
#include "toa/scattering.hpp"

using namespace toa;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_close(cplx got, double re, double im, double tol = 1e-12) {
  CHECK(std::abs(got - cplx(re, im)) < tol);
}

}  // namespace

TEST_CASE("trigger flip formula") {
  CHECK(trigger_flip_probability(1) == 0.5);
  CHECK(trigger_flip_probability(3) == 0.875);
  for (int n = 1; n <= 6; ++n) CHECK(trigger_flip_probability(n) == 1.0 - std::ldexp(1.0, -n));
  CHECK_THROWS_AS(trigger_flip_probability(0), Error);
}

TEST_CASE("clock amplitudes, frozen values") {
  const ScatterAmplitudes a = clock_scatter({1.0, 2.0, 12.5, 3.0});
  check_close(a.phi_R_up, 0.933641248048862, -0.174809865923468);
  check_close(a.phi_R_down, -0.0595919184315201, -0.156983893832223);
  check_close(a.phi_L_up, -0.0663587519511383, -0.174809865923468);
  check_close(a.phi_L_down, -0.0595919184315201, -0.156983893832223);
  CHECK(detection_probability(a) == doctest::Approx(0.0627935575328891).epsilon(1e-12));
  CHECK(a.flux_ratio() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hard-delta limit, frozen values and closed form") {
  const ScatterAmplitudes l = clock_scatter_limit(12.5, 3.0, 1.0);
  // k_up / (k_up + k_down) with k_up = 5, k_down = sqrt(31)
  const double r = 5.0 / (5.0 + std::sqrt(31.0));
  check_close(l.phi_R_up, r, 0.0);
  check_close(l.phi_R_down, -r, 0.0);
  check_close(l.phi_L_up, r - 1.0, 0.0);
  check_close(l.phi_L_down, -r, 0.0);
  CHECK(detection_probability_limit(1.0, 100.0, 1.0) == doctest::Approx(0.164617462670866).epsilon(1e-13));
  CHECK(detection_probability_limit(12.5, 0.0, 1.0) == 0.5);
}

TEST_CASE("finite alpha converges to the limit") {
  double prev = 1.0;
  for (double alpha : {1e2, 1e3, 1e4, 1e5}) {
    const ScatterAmplitudes a = clock_scatter({1.0, alpha, 2.0, 1.5});
    const ScatterAmplitudes l = clock_scatter_limit(2.0, 1.5, 1.0);
    const double err = std::abs(a.phi_R_down - l.phi_R_down);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("clock scatter matches transfer matrices on random draws") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double alpha = std::exp(std::log(0.05) + u(rng) * std::log(1e4));
    const double ek = 0.05 + 20.0 * u(rng);
    const double p = 30.0 * u(rng);
    const ScatterAmplitudes a = clock_scatter({1.0, alpha, ek, p});
    PiecewiseChannels pw;
    pw.regions = {SpinMatrix::diag(p, 0.0)};
    pw.deltas = {{0.0, SpinMatrix::up_x_projector(), alpha}};
    const ChannelScattering b = scatter_piecewise(pw, ek + p, 1.0, 0);
    CHECK(std::abs(a.phi_R_up - b.transmitted[0]) < 1e-9);
    CHECK(std::abs(a.phi_R_down - b.transmitted[1]) < 1e-9);
    CHECK(std::abs(a.phi_L_up - b.reflected[0]) < 1e-9);
    CHECK(std::abs(a.phi_L_down - b.reflected[1]) < 1e-9);
    CHECK(std::abs(a.flux_ratio() - 1.0) < 1e-12);
  }
}

TEST_CASE("closed down channel carries no detection") {
  const ScatterAmplitudes a = clock_scatter_general({1.0, 3.0, 2.0, -5.0});
  CHECK(a.k.down.real() == 0.0);
  CHECK(a.k.down.imag() > 0.0);
  CHECK(detection_probability(a) == 0.0);
  CHECK(a.flux_ratio() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("general scatter agrees with clock scatter for p >= 0") {
  const ScatterAmplitudes a = clock_scatter({1.0, 4.0, 3.0, 2.0});
  const ScatterAmplitudes b = clock_scatter_general({1.0, 4.0, 3.0, 2.0});
  CHECK(std::abs(a.phi_R_down - b.phi_R_down) < 1e-14);
  CHECK(std::abs(a.phi_L_up - b.phi_L_up) < 1e-14);
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(clock_scatter({1.0, 1.0, 0.0, 1.0}), Error);
  CHECK_THROWS_AS(clock_scatter({1.0, 1.0, 1.0, -1.0}), Error);
  CHECK_THROWS_AS(clock_scatter({0.0, 1.0, 1.0, 1.0}), Error);
  CHECK_THROWS_AS(clock_scatter_limit(1.0, -2.0, 1.0), Error);
}

TEST_CASE("clock-averaged detection, frozen values") {
  CHECK(clock_detection_average(12.5, 0.8, 1.0, kInf) == doctest::Approx(0.499841660413738).epsilon(1e-10));
  CHECK(clock_detection_average(12.5, 0.8, 1.0, 5.0) == doctest::Approx(0.250117194323037).epsilon(1e-10));
}

TEST_CASE("clock-averaged detection falls with finer clocks") {
  double prev = 1.0;
  for (double product : {10.0, 1.0, 0.1, 0.01}) {
    const double d = clock_detection_average(12.5, product / 12.5, 1.0, kInf);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("square coupling approaches the delta as the width shrinks") {
  const ScatterAmplitudes d = clock_scatter({1.0, 2.0, 4.0, 1.0});
  double prev = 1.0;
  for (double w : {0.4, 0.1, 0.025}) {
    const double err = std::abs(clock_scatter_square({1.0, 2.0, 4.0, 1.0}, w).phi_R_down - d.phi_R_down);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("booster amplitudes, frozen values and flux") {
  const BoosterAmplitudes b = booster_scatter({1.0, 2.0, 10.0, 10.0, 10.0, 4.5});
  CHECK(b.reflected_up() == doctest::Approx(0.153175988601998).epsilon(1e-12));
  CHECK(b.transmitted_down() == doctest::Approx(0.846824011398002).epsilon(1e-12));
  check_close(b.phi_L_up, 0.0131042725977499, -0.391157598215453);
  check_close(b.phi_R_down, -0.546653487766579, -0.415841048757376);
  for (double e : {0.5, 2.0, 6.0, 9.5}) {
    const BoosterAmplitudes s = booster_scatter({1.0, 2.0, 10.0, 10.0, 10.0, e});
    CHECK(s.flux_ratio() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(booster_scatter({1.0, 2.0, 10.0, 10.0, 10.0, 12.0}), Error);
}

TEST_CASE("piecewise scattering conserves flux across steps") {
  PiecewiseChannels pw;
  pw.boundaries = {-1.0, 0.5, 2.0};
  pw.regions = {SpinMatrix::diag(0.0, 0.5), SpinMatrix{1.0, cplx(0.3, 0.2), 2.0}, SpinMatrix{0.2, 0.7, -0.4},
                SpinMatrix::diag(0.1, 0.3)};
  for (double e : {1.0, 3.0, 8.0}) {
    for (int ch = 0; ch < 2; ++ch) {
      const ChannelScattering s = scatter_piecewise(pw, e, 1.0, ch);
      CHECK(s.flux_ratio() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("stationary readout for two Gaussians, frozen values") {
  const GaussianSpec a{-12.0, 1.0, 2.0, 1.0};
  const GaussianSpec b{-12.0, 4.0, 2.0, 1.0};
  StationaryReadoutSpec spec;
  spec.accuracy = 4.0;
  spec.wavenumber_max = 8.0;
  const ArrivalSeries r = stationary_clock_readout(
      [&](double k) { return (gaussian_amplitude(a, k) + gaussian_amplitude(b, k)) / std::sqrt(2.0); }, 8.0, spec);
  CHECK(r.detected() == doctest::Approx(0.488819610995699).epsilon(1e-9));
  CHECK(r.weight_between(7.5, kInf) == doctest::Approx(0.229754891548488).epsilon(1e-9));
  CHECK(r.detected() + r.residual == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("stationary readout of a single fast packet peaks at the classical time") {
  const GaussianSpec g{-20.0, 5.0, 2.0, 1.0};
  StationaryReadoutSpec spec;
  spec.accuracy = 2.0;
  const ArrivalSeries r = stationary_clock_readout([&](double k) { return gaussian_amplitude(g, k); }, 9.0, spec);
  CHECK(r.mean_time() == doctest::Approx(4.0).epsilon(0.05));
}
