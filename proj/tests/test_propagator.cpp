#include <doctest.h>

#include <cmath>

#include "toa/error.hpp"
#include "toa/propagator.hpp"

using namespace toa;

namespace {

double distance(const SpinorWave& a, const SpinorWave& b) {
  return std::sqrt((a.up - b.up).norm2() + (a.down - b.down).norm2());
}

}  // namespace

TEST_CASE("free evolution matches the analytic width and conserves norm") {
  const Grid1D g(-60.0, 60.0, 1024);
  const WaveFunction psi = make_gaussian(g, {-10.0, 2.0, 1.0, 1.0});
  const WaveFunction later = free_evolve(psi, 4.0, 1.0);
  CHECK(later.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expectation(later, Observable::Position) == doctest::Approx(-2.0).epsilon(1e-9));
  // <x^2> - <x>^2 = sigma^2 (1 + (t / 2 m sigma^2)^2)
  const WaveFunction pos = to_position(later);
  double m2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) m2 += std::norm(pos[i]) * (g.x(i) + 2.0) * (g.x(i) + 2.0) * g.dx();
  CHECK(m2 == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("split-step with no potential equals exact free evolution") {
  const Grid1D g(-40.0, 40.0, 512);
  const WaveFunction psi = make_gaussian(g, {-10.0, 3.0, 1.0, 1.0});
  EvolutionParams ep{0.4 / g.e_max(1.0), 0, 1.0};
  ep.n_steps = static_cast<std::size_t>(3.0 / ep.dt);
  const SpinorWave out = evolve_spinor(SpinorWave::spin_up(psi), PotentialSpec{}, ep);
  const WaveFunction exact = to_position(free_evolve(psi, ep.duration(), 1.0));
  CHECK(std::sqrt((to_position(out.up) - exact).norm2()) < 1e-10);
  CHECK(out.norm2() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Strang order on a coupled step potential") {
  const Grid1D g(-20.0, 20.0, 256);
  const WaveFunction psi = make_gaussian(g, {-5.0, 3.0, 1.0, 1.0});
  PotentialSpec pot;
  pot.boundaries = {-1.0, 1.0};
  pot.regions = {SpinMatrix::diag(0.0, 1.0), SpinMatrix{2.0, 0.5, 1.0}, SpinMatrix::diag(0.0, 1.0)};
  const double T = 2.0;
  const double base = T / std::ceil(T / (0.4 / g.e_max(1.0)));
  auto run = [&](double dt) {
    return evolve_spinor(SpinorWave::spin_up(psi), pot,
                         EvolutionParams{dt, static_cast<std::size_t>(std::llround(T / dt)), 1.0});
  };
  const SpinorWave ref = run(base / 64.0);
  const double e1 = distance(run(base), ref);
  const double e2 = distance(run(base / 2.0), ref);
  const double ratio = e1 / e2;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
  CHECK(run(base).norm2() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("stability bound is enforced") {
  const Grid1D g(-20.0, 20.0, 256);
  const WaveFunction psi = make_gaussian(g, {-5.0, 3.0, 1.0, 1.0});
  const EvolutionParams ep{0.6 / g.e_max(1.0), 10, 1.0};
  try {
    evolve_spinor(SpinorWave::spin_up(psi), PotentialSpec{}, ep);
    FAIL("expected a stability violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StabilityViolation);
  }
}

TEST_CASE("wrap-around is detected") {
  const Grid1D g(-20.0, 20.0, 256);
  const WaveFunction psi = make_gaussian(g, {5.0, 5.0, 1.0, 1.0});
  EvolutionParams ep{0.4 / g.e_max(1.0), 0, 1.0};
  ep.n_steps = static_cast<std::size_t>(4.0 / ep.dt);
  try {
    evolve_spinor(SpinorWave::spin_up(psi), PotentialSpec{}, ep);
    FAIL("expected wrap-around");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WrapAround);
  }
}

TEST_CASE("delta realization width") {
  const Grid1D g(-40.0, 40.0, 512);
  const PotentialSpec pot = PotentialSpec::trigger(1000.0);
  // 4 dx rounded up to an odd number of cells
  CHECK(pot.delta_width(g, 1000.0) == doctest::Approx(5.0 * g.dx()));
  CHECK(pot.delta_width(g, 0.5) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("hard trigger flips half of a packet (frozen)") {
  const Grid1D g(-40.0, 40.0, 512);
  const WaveFunction psi = make_gaussian(g, {-15.0, 5.0, 1.0, 1.0});
  EvolutionParams ep{0.4 / g.e_max(1.0), 0, 1.0};
  ep.n_steps = static_cast<std::size_t>(std::ceil(14.0 / ep.dt - 1e-9));
  CaptureSpec cap;
  cap.inner_radius = 20.0;
  const SpinorRun run = evolve_spinor_captured(SpinorWave::spin_up(psi), PotentialSpec::trigger(1000.0), ep, cap);
  CHECK(run.down_probability() == doctest::Approx(0.500575).epsilon(2e-6));
  CHECK(std::abs(run.norm2() - 1.0) < 1e-5);
}

TEST_CASE("capture conserves probability for a free packet") {
  const Grid1D g(-40.0, 40.0, 512);
  const WaveFunction psi = make_gaussian(g, {-10.0, 5.0, 1.0, 1.0});
  EvolutionParams ep{0.4 / g.e_max(1.0), 0, 1.0};
  ep.n_steps = static_cast<std::size_t>(14.0 / ep.dt);
  CaptureSpec cap;
  cap.inner_radius = 12.0;
  cap.probes = {5.0};
  const SpinorRun run = evolve_spinor_captured(SpinorWave::spin_up(psi), PotentialSpec{}, ep, cap);
  CHECK(run.norm2() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(run.psi.norm2() < 1e-6);
  // The probe keeps the initial amplitude exactly (interaction picture).
  const OutgoingWaves out = run.outgoing(PotentialSpec{});
  const cplx g5 = out.probe_values[1][0][0];
  CHECK(std::abs(g5 - gaussian_amplitude({-10.0, 5.0, 1.0, 1.0}, 5.0)) < 1e-6);
}

TEST_CASE("clock slices: weights and momenta") {
  ClockSpec c;
  c.accuracy = 0.5;
  c.n_slices = 64;
  const auto p = c.momenta();
  REQUIRE(p.size() == 64);
  CHECK(p.front() == doctest::Approx(-12.0));
  CHECK(p.back() == doctest::Approx(12.0));
  double total = 0.0;
  for (const cplx w : c.weights()) total += std::norm(w);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("clock probes follow energy bookkeeping") {
  // Down channel carries k^2/2m + p.
  const auto probes = clock_probe_wavenumbers({5.0}, 3.0, 1.0);
  bool found_up = false, found_down = false;
  for (double q : probes) {
    found_up = found_up || std::abs(q - 5.0) < 1e-12;
    found_down = found_down || std::abs(q - std::sqrt(31.0)) < 1e-12;
  }
  CHECK(found_up);
  CHECK(found_down);
}

TEST_CASE("cascade with uniform slope translates the pointer exactly") {
  const Grid1D g(-40.0, 40.0, 256);
  const WaveFunction psi = make_gaussian(g, {-15.0, 5.0, 1.0, 1.0});
  EvolutionParams ep{0.4 / g.e_max(1.0), 0, 1.0};
  ep.n_steps = static_cast<std::size_t>(2.0 / ep.dt);
  ClockSpec clock;
  clock.accuracy = 2.0;
  clock.n_slices = 8;
  CascadeParams cp;
  cp.uniform = true;
  const CascadeState st = cascade_evolve(psi, clock, cp, ep);
  const WaveFunction free = to_position(free_evolve(psi, st.elapsed, 1.0));
  for (std::size_t l = 0; l < st.slices.size(); ++l) {
    const WaveFunction expect = std::polar(1.0, st.momenta[l] * st.elapsed) * free;
    CHECK(std::sqrt((expect - st.slices[l]).norm2()) < 1e-10);
  }
}

TEST_CASE("cascade coarse clock reads the classical arrival") {
  const Grid1D g(-40.0, 40.0, 512);
  const WaveFunction psi = make_gaussian(g, {-15.0, 5.0, 1.0, 1.0});
  EvolutionParams ep{0.4 / g.e_max(1.0), 0, 1.0};
  ep.n_steps = static_cast<std::size_t>(std::ceil(6.0 / ep.dt - 1e-9));
  ClockSpec clock;
  clock.accuracy = 2.0;
  clock.n_slices = 32;
  const ArrivalSeries r = cascade_readout(cascade_evolve(psi, clock, CascadeParams{}, ep));
  CHECK(r.mean_time() == doctest::Approx(3.0).epsilon(0.2 / 3.0));
  CHECK(r.detected() + r.residual == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("empty readout is an error") {
  CascadeState empty;
  CHECK_THROWS_AS(cascade_readout(empty), Error);
}
