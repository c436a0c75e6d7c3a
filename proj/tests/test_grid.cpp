#include <doctest.h>

#include <cmath>

#include "toa/error.hpp"
#include "toa/fft.hpp"
#include "toa/grid.hpp"

using namespace toa;

TEST_CASE("grid geometry") {
  const Grid1D g(-40.0, 40.0, 1024);
  CHECK(g.dx() == doctest::Approx(80.0 / 1024));
  CHECK(g.dk() == doctest::Approx(2.0 * kPi / 80.0));
  CHECK(g.k(0) == 0.0);
  CHECK(g.k(512) == doctest::Approx(-g.k_max()));
  CHECK(g.k(511) == doctest::Approx(511 * g.dk()));
  CHECK(g.nearest_index(0.0) == 512);
  CHECK(g.nearest_index(-1e9) == 0);
  CHECK(g.nearest_index(1e9) == 1023);
}

TEST_CASE("grid rejects bad sizes") {
  CHECK_THROWS_AS(Grid1D(-1.0, 1.0, 100), Error);
  CHECK_THROWS_AS(Grid1D(-1.0, 1.0, 8), Error);
  CHECK_THROWS_AS(Grid1D(1.0, -1.0, 64), Error);
}

TEST_CASE("gaussian packet moments") {
  const Grid1D g(-40.0, 40.0, 1024);
  const WaveFunction psi = make_gaussian(g, {-15.0, 5.0, 1.0, 1.0});
  CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expectation(psi, Observable::Position) == doctest::Approx(-15.0).epsilon(1e-10));
  CHECK(expectation(psi, Observable::Wavenumber) == doctest::Approx(5.0).epsilon(1e-10));
  // <E> = (k0^2 + 1/(4 sigma^2)) / 2m
  CHECK(expectation(psi, Observable::KineticEnergy, 1.0) == doctest::Approx(12.625).epsilon(1e-10));
}

TEST_CASE("packet too close to the edge") {
  const Grid1D g(-10.0, 10.0, 256);
  CHECK_THROWS_AS(make_gaussian(g, {-8.0, 1.0, 1.0, 1.0}), Error);
}

TEST_CASE("representation change is unitary and invertible") {
  const Grid1D g(-20.0, 20.0, 256);
  const WaveFunction psi = make_gaussian(g, {-3.0, 2.0, 1.2, 1.0});
  const WaveFunction m = to_momentum(psi);
  CHECK(m.representation() == Representation::Momentum);
  CHECK(m.norm2() == doctest::Approx(psi.norm2()).epsilon(1e-13));
  const WaveFunction back = to_position(m);
  double err = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) err = std::max(err, std::abs(back[i] - psi[i]));
  CHECK(err < 1e-13);
}

TEST_CASE("momentum samples match the closed-form amplitude") {
  const Grid1D g(-40.0, 40.0, 1024);
  const GaussianSpec spec{-12.0, 4.0, 2.0, 1.0};
  const WaveFunction m = to_momentum(make_gaussian(g, spec));
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(m[j] - gaussian_amplitude(spec, g.k(j))));
  CHECK(err < 1e-12);
  CHECK(std::abs(fourier_amplitude(make_gaussian(g, spec), 4.3) - gaussian_amplitude(spec, 4.3)) < 1e-12);
}

TEST_CASE("spectral derivative of a plane-wave packet") {
  const Grid1D g(-20.0, 20.0, 512);
  const WaveFunction psi = make_gaussian(g, {0.0, 3.0, 1.0, 1.0});
  const WaveFunction d = spectral_derivative(psi);
  // d/dx psi = (i k0 - x / (2 sigma^2)) psi
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx expect = cplx(-g.x(i) / 2.0, 3.0) * psi[i];
    err = std::max(err, std::abs(d[i] - expect));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("inner product needs matching grids") {
  const WaveFunction a(Grid1D(-10.0, 10.0, 64));
  const WaveFunction b(Grid1D(-10.0, 10.0, 128));
  CHECK_THROWS_AS(inner(a, b), Error);
}

TEST_CASE("fft round trip") {
  CVec v(64);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(std::sin(0.3 * i), std::cos(0.7 * i));
  const CVec orig = v;
  fft::forward(v);
  fft::backward(v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] / 64.0 - orig[i]) < 1e-14);
}
