#include <doctest.h>

#include <cmath>

#include "toa/error.hpp"
#include "toa/toa_operator.hpp"

using namespace toa;

namespace {

const Grid1D& wide() {
  static const Grid1D g(-100.0, 100.0, 2048);
  return g;
}

const GaussianSpec kPacket{-10.0, 5.0, 1.0, 1.0};

}  // namespace

TEST_CASE("eigenfunction values (frozen)") {
  const cplx a = toa_eigenfunction(2.0, 3.0, 1.0);
  CHECK(a.real() == doctest::Approx(-0.629580349774883).epsilon(1e-12));
  CHECK(a.imag() == doctest::Approx(0.284769051080032).epsilon(1e-12));
  // k < 0 carries the extra factor i
  const cplx b = toa_eigenfunction(2.0, -3.0, 1.0);
  CHECK(std::abs(b - cplx(0.0, 1.0) * a) < 1e-14);
}

TEST_CASE("cutoff profile is a smooth step") {
  const CutoffProfile o{0.1};
  CHECK(o(0.0) == 0.0);
  CHECK(o(0.1) == 1.0);
  CHECK(o(-0.5) == 1.0);
  CHECK(o(0.05) == doctest::Approx(0.5));
  // vanishes faster than sqrt|k|
  for (double k : {3e-3, 1e-3, 1e-4}) CHECK(o(k) / std::sqrt(k) < 1e-6);
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = o(0.001 * i);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(CutoffProfile{0.0}.validate(), Error);
}

TEST_CASE("arrival-time amplitude of a free packet (frozen)") {
  const WaveFunction psi = make_gaussian(wide(), kPacket);
  const ToaState s = toa_transform(psi, 1.0, ToaWindow{-20.0, 0.01, 8192});
  CHECK(s.norm2() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.mean_time() == doctest::Approx(2.02063231298372).epsilon(1e-8));
  CHECK(s.peak_time() == doctest::Approx(1.96).epsilon(1e-9));
}

TEST_CASE("window too coarse for the energy content aliases") {
  const WaveFunction psi = make_gaussian(wide(), kPacket);
  try {
    toa_transform(psi, 1.0, ToaWindow{-20.0, 0.5, 256});
    FAIL("expected aliasing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Aliasing);
  }
}

TEST_CASE("operator expectation agrees with the eigenbasis mean") {
  const WaveFunction psi = make_gaussian(wide(), kPacket);
  const RegularizedToa op(wide(), CutoffProfile{0.1}, 1.0);
  CHECK(op.expectation(psi) == doctest::Approx(2.02063231298372).epsilon(1e-8));
}

TEST_CASE("regularized operator is Hermitian") {
  const Grid1D g(-50.0, 50.0, 512);
  const RegularizedToa op(g, CutoffProfile{0.1}, 1.0);
  const WaveFunction a = to_momentum(make_gaussian(g, {-8.0, 3.0, 1.5, 1.0}));
  const WaveFunction b = to_momentum(make_gaussian(g, {4.0, -2.0, 1.0, 1.0}));
  const cplx ab = inner(a, op.apply(b));
  const cplx ba = inner(b, op.apply(a));
  CHECK(std::abs(ab - std::conj(ba)) < 1e-12 * (1.0 + std::abs(ab)));
}

TEST_CASE("commutator with H is -i O^2 and drifts accordingly") {
  const Grid1D g(-200.0, 200.0, 4096);
  const RegularizedToa op(g, CutoffProfile{0.1}, 1.0);
  const WaveFunction psi = make_gaussian(g, {1.0, 0.3, 1.0, 1.0});  // weight near k = 0
  const cplx c = op.commutator_expectation(psi);
  CHECK(std::abs(c - cplx(0.0, -op.cutoff_moment(psi, 2))) < 1e-6);
  CHECK(op.weight_below_cutoff(psi) > 1e-3);
  const DriftResult d = toa_drift(op, psi, 1.0);
  CHECK(d.evolved == doctest::Approx(d.closed_form).epsilon(1e-6));
  CHECK(d.slope == doctest::Approx(1.0 - op.cutoff_moment(psi, 2)).epsilon(1e-6));
}

TEST_CASE("overlap kernel: momentum integral vs closed form") {
  const KernelCheck k = overlap_kernel_check({0.0, 0.5, 0.0}, {0.6, 0.4, 0.0}, 1.0);
  CHECK(k.closed_form.real() == doctest::Approx(0.504733500980337).epsilon(1e-10));
  CHECK(k.closed_form.imag() == doctest::Approx(0.440692624980001).epsilon(1e-10));
  CHECK(k.residual < 1e-4);
}

TEST_CASE("kick shifts the energy of a state away from k = 0") {
  const Grid1D g(-100.0, 100.0, 512);
  const RegularizedToa op(g, CutoffProfile{0.1}, 1.0);
  const WaveFunction psi = make_gaussian(g, {-10.0, 4.0, 2.0, 1.0});
  const ToaKick kick(op);
  const double q = 2.0;
  const WaveFunction out = kick.apply(psi, q);
  CHECK(out.norm2() == doctest::Approx(psi.norm2()).epsilon(1e-10));
  const double e0 = expectation(psi, Observable::KineticEnergy, 1.0);
  const double e1 = expectation(out, Observable::KineticEnergy, 1.0);
  CHECK(e1 - e0 == doctest::Approx(q).epsilon(0.01));
  const WaveFunction ref = energy_shift_kick(op, psi, q);
  CHECK(std::sqrt((to_momentum(out) - to_momentum(ref)).norm2()) < 0.01);
}

TEST_CASE("coherent states") {
  CHECK(coherent_mean_energy({10.0, 0.5, 1.0}) == doctest::Approx(1.12837916709551).epsilon(1e-12));
  const WaveFunction psi = coherent_toa_state(wide(), {10.0, 0.5, 1.0});
  CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expectation(psi, Observable::KineticEnergy, 1.0) == doctest::Approx(1.12837916709551).epsilon(1e-3));
  const ToaState s = toa_transform(psi, 1.0, ToaWindow{-10.0, 0.01, 4096});
  CHECK(s.mean_time() == doctest::Approx(10.0).epsilon(1e-3));
  CHECK_THROWS_AS(coherent_toa_state(Grid1D(-100.0, 100.0, 64), {10.0, 0.05, 1.0}), Error);
}
