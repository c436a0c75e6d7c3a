#include "toa/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "toa/error.hpp"
#include "toa/fft.hpp"
#include "toa/parallel.hpp"

namespace toa {
namespace {

constexpr cplx I{0.0, 1.0};

bool same(const SpinMatrix& a, const SpinMatrix& b) { return a.uu == b.uu && a.ud == b.ud && a.dd == b.dd; }

// exp(-i V dt) for a Hermitian 2x2 V, row-major.
std::array<cplx, 4> spin_exponential(const SpinMatrix& v, double dt) {
  const double mean = 0.5 * (v.uu + v.dd);
  const double half = 0.5 * (v.uu - v.dd);
  const double rad = std::hypot(half, std::abs(v.ud));
  const cplx global = std::polar(1.0, -mean * dt);
  const double c = std::cos(rad * dt);
  const double s = rad > 0.0 ? std::sin(rad * dt) / rad : dt;
  return {global * cplx(c, -s * half), global * (-I * s * v.ud), global * (-I * s * v.du()),
          global * cplx(c, s * half)};
}

double guard_probability(const CVec& psi, const Grid1D& grid) {
  const auto band = static_cast<std::size_t>(std::ceil(kGuardFraction * static_cast<double>(grid.size())));
  double s = 0.0;
  for (std::size_t i = 0; i < band; ++i) s += std::norm(psi[i]) + std::norm(psi[grid.size() - 1 - i]);
  return s * grid.dx();
}

// C-infinity step from 0 at u <= 0 to 1 at u >= 1.
double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// Smooth in r, so the mask does not scatter packets into slow modes.
double capture_mask(double r, const CaptureSpec& c, double tau) {
  if (r <= c.inner_radius) return 0.0;
  return -std::expm1(-c.rate * smooth_step((r - c.inner_radius) / c.ramp_width) * tau);
}

// Continuous Fourier amplitudes of a position-space array, in FFT order.
CVec continuous_spectrum(CVec data, const Grid1D& grid) {
  fft::forward(data);
  const double scale = grid.dx() / std::sqrt(2.0 * kPi);
  for (std::size_t j = 0; j < data.size(); ++j) data[j] *= scale * std::polar(1.0, -grid.k(j) * grid.x_min());
  return data;
}

cplx direct_amplitude(const CVec& data, const Grid1D& grid, double k) {
  cplx s{};
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i] != cplx{}) s += data[i] * std::polar(1.0, -k * grid.x(i));
  return s * (grid.dx() / std::sqrt(2.0 * kPi));
}

void init_outgoing(OutgoingWaves& out, const Grid1D& grid, const std::vector<double>& probes,
                   const std::array<std::array<double, 2>, 2>& potential) {
  out.probes = probes;
  out.potential = potential;
  for (auto& side : out.spectrum)
    for (auto& ch : side) ch.assign(grid.size(), cplx{});
  for (auto& side : out.probe_values)
    for (auto& ch : side) ch.assign(probes.size(), cplx{});
}

// Adds a position-space piece living on one side to the interaction-picture buffers.
void accumulate(OutgoingWaves& out, const CVec& piece, const Grid1D& grid, int side, int channel, double time,
                double mass) {
  const double v = out.potential[side][channel];
  const CVec spec = continuous_spectrum(piece, grid);
  CVec& dst = out.spectrum[side][channel];
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double k = grid.k(j);
    dst[j] += spec[j] * std::polar(1.0, (k * k / (2.0 * mass) + v) * time);
  }
  for (std::size_t p = 0; p < out.probes.size(); ++p) {
    const double k = out.probes[p];
    out.probe_values[side][channel][p] +=
        direct_amplitude(piece, grid, k) * std::polar(1.0, (k * k / (2.0 * mass) + v) * time);
  }
}

// Split-step integrator over one or two components sharing a grid.
class SplitStepper {
 public:
  SplitStepper(const Grid1D& grid, const std::vector<SpinMatrix>& potential, const EvolutionParams& params,
               bool spinless)
      : grid_(grid), params_(params), spinless_(spinless) {
    params.validate(grid);
    const std::size_t n = grid.size();
    unitary_.resize(n);
    for (std::size_t i = 0; i < n; ++i) unitary_[i] = spin_exponential(potential[i], params.dt);
    kin_full_.resize(n);
    kin_half_.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double e = grid.k(j) * grid.k(j) / (2.0 * params.mass);
      kin_full_[j] = inv_n * std::polar(1.0, -e * params.dt);
      kin_half_[j] = inv_n * std::polar(1.0, -0.5 * e * params.dt);
    }
  }

  // Evolves in place. `on_sync(step)` is called whenever the state sits at an
  // integer time step in position space; it returns true if it modified the state.
  template <class SyncFn>
  void run(CVec& up, CVec& down, std::size_t sync_interval, SyncFn&& on_sync) {
    const std::size_t steps = params_.n_steps;
    if (steps == 0) return;
    kinetic(up, down, kin_half_);
    for (std::size_t s = 0; s < steps; ++s) {
      potential(up, down);
      const bool last = s + 1 == steps;
      const bool sync = last || (sync_interval > 0 && (s + 1) % sync_interval == 0);
      if (sync) {
        kinetic(up, down, kin_half_);
        on_sync(s + 1);
        if (!last) kinetic(up, down, kin_half_);
      } else {
        kinetic(up, down, kin_full_);
      }
    }
  }

 private:
  void kinetic(CVec& up, CVec& down, const CVec& factor) {
    apply_kinetic(up, factor);
    if (!spinless_) apply_kinetic(down, factor);
  }

  static void apply_kinetic(CVec& psi, const CVec& factor) {
    fft::forward(psi);
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= factor[j];
    fft::backward(psi);
  }

  void potential(CVec& up, CVec& down) {
    if (spinless_) {
      for (std::size_t i = 0; i < up.size(); ++i) up[i] *= unitary_[i][0];
      return;
    }
    for (std::size_t i = 0; i < up.size(); ++i) {
      const auto& u = unitary_[i];
      const cplx a = up[i];
      const cplx b = down[i];
      up[i] = u[0] * a + u[1] * b;
      down[i] = u[2] * a + u[3] * b;
    }
  }

  Grid1D grid_;
  EvolutionParams params_;
  bool spinless_;
  std::vector<std::array<cplx, 4>> unitary_;
  CVec kin_full_;
  CVec kin_half_;
};

void check_wrap(const CVec& up, const CVec& down, const Grid1D& grid) {
  const double g = guard_probability(up, grid) + guard_probability(down, grid);
  if (g > kWrapTolerance)
    throw Error(ErrorKind::WrapAround, "probability " + std::to_string(g) + " reached the guard band");
}

SpinorWave positional(const SpinorWave& psi) {
  return SpinorWave(to_position(psi.up), to_position(psi.down));
}

}  // namespace

// ---------------------------------------------------------------------------

void PotentialSpec::validate() const {
  if (regions.size() != boundaries.size() + 1)
    throw Error(ErrorKind::InvalidArgument, "need exactly one more region than boundaries");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i] > boundaries[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "region boundaries must be strictly increasing");
  if (std::abs(regions.front().ud) != 0.0 || std::abs(regions.back().ud) != 0.0)
    throw Error(ErrorKind::InvalidArgument, "asymptotic regions must be diagonal");
  for (const auto& d : deltas)
    if (!(d.strength >= 0.0) || !std::isfinite(d.strength))
      throw Error(ErrorKind::InvalidArgument, "delta strength must be finite and non-negative");
}

const SpinMatrix& PotentialSpec::region_at(double x) const {
  const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
  return regions[static_cast<std::size_t>(it - boundaries.begin())];
}

double PotentialSpec::delta_width(const Grid1D& grid, double strength) const {
  const double target = strength > 0.0 ? std::max(1.0 / strength, 4.0 * grid.dx()) : 4.0 * grid.dx();
  auto cells = static_cast<std::size_t>(std::ceil(target / grid.dx() - 1e-9));
  if (cells % 2 == 0) ++cells;
  return static_cast<double>(cells) * grid.dx();
}

std::vector<SpinMatrix> PotentialSpec::sample(const Grid1D& grid) const {
  validate();
  std::vector<SpinMatrix> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = region_at(grid.x(i));
  for (const auto& d : deltas) {
    const double width = delta_width(grid, d.strength);
    const auto half = static_cast<std::size_t>(std::llround(width / grid.dx())) / 2;
    const std::size_t c = grid.nearest_index(d.position);
    if (c < half || c + half >= grid.size())
      throw Error(ErrorKind::GridTooSmall, "delta square does not fit on the grid");
    const SpinMatrix add = (d.strength / width) * d.matrix;
    for (std::size_t i = c - half; i <= c + half; ++i) out[i] = out[i] + add;
  }
  return out;
}

PiecewiseChannels PotentialSpec::realized(const Grid1D& grid) const {
  const auto cells = sample(grid);
  PiecewiseChannels out;
  out.regions.push_back(cells.front());
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (!same(cells[i], cells[i - 1])) {
      out.boundaries.push_back(grid.x(i) - 0.5 * grid.dx());
      out.regions.push_back(cells[i]);
    }
  }
  return out;
}

PiecewiseChannels PotentialSpec::band_limited(const Grid1D& grid, std::size_t subdivisions,
                                              std::size_t half_window) const {
  if (subdivisions == 0) throw Error(ErrorKind::InvalidArgument, "need at least one subdivision per cell");
  const auto cells = sample(grid);
  const std::size_t n = grid.size();
  std::size_t first = n;
  std::size_t last = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!same(cells[i], cells[i - 1])) {
      first = std::min(first, i - 1);
      last = std::max(last, i);
    }
  }
  PiecewiseChannels out;
  out.regions.push_back(cells.front());
  if (first == n) return out;
  first = first > half_window ? first - half_window : 0;
  last = std::min(n - 1, last + half_window);
  const double dx = grid.dx();
  const double sub = dx / static_cast<double>(subdivisions);
  const double lo = grid.x(first) - 0.5 * dx;
  const std::size_t pieces = (last - first + 1) * subdivisions;
  for (std::size_t q = 0; q < pieces; ++q) {
    const double x = lo + (static_cast<double>(q) + 0.5) * sub;
    SpinMatrix v{};
    for (std::size_t i = 0; i < n; ++i) {
      // Periodic interpolation kernel for an even number of points.
      const double u = (x - grid.x(i)) / dx;
      const double w = std::abs(u) < 1e-12
                           ? 1.0
                           : std::sin(kPi * u) / (static_cast<double>(n) * std::tan(kPi * u / static_cast<double>(n)));
      v = v + w * cells[i];
    }
    out.boundaries.push_back(lo + static_cast<double>(q) * sub);
    out.regions.push_back(v);
  }
  out.boundaries.push_back(lo + static_cast<double>(pieces) * sub);
  out.regions.push_back(cells.back());
  return out;
}

std::array<std::array<double, 2>, 2> PotentialSpec::asymptotic() const {
  return {{{regions.front().uu, regions.front().dd}, {regions.back().uu, regions.back().dd}}};
}

PotentialSpec PotentialSpec::trigger(double alpha) { return trigger_clock(alpha, 0.0); }

PotentialSpec PotentialSpec::trigger_clock(double alpha, double clock_momentum) {
  PotentialSpec v;
  v.regions = {SpinMatrix::diag(clock_momentum, 0.0)};
  v.deltas = {{0.0, SpinMatrix::up_x_projector(), alpha}};
  return v;
}

PotentialSpec PotentialSpec::booster(const BoosterParams& params) {
  PotentialSpec v;
  v.boundaries = {0.0};
  v.regions = {SpinMatrix::diag(0.0, params.V1), SpinMatrix::diag(params.W, -params.V2)};
  v.deltas = {{0.0, SpinMatrix::sigma_x(), params.alpha}};
  return v;
}

void EvolutionParams::validate(const Grid1D& grid) const {
  if (!(dt > 0.0) || !(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt and mass must be positive");
  if (!(dt * grid.e_max(mass) < 0.5))
    throw Error(ErrorKind::StabilityViolation,
                "dt * E_max = " + std::to_string(dt * grid.e_max(mass)) + " must stay below 0.5");
}

double SpinorRun::norm2() const {
  double s = psi.norm2();
  for (const auto& side : captured.spectrum)
    for (const auto& ch : side)
      for (const auto& v : ch) s += std::norm(v) * psi.grid().dk();
  return s;
}

double SpinorRun::down_probability() const {
  double s = psi.down.norm2();
  for (const auto& side : captured.spectrum)
    for (const auto& v : side[1]) s += std::norm(v) * psi.grid().dk();
  return s;
}

OutgoingWaves SpinorRun::outgoing(const PotentialSpec& potential, double split) const {
  const Grid1D& grid = psi.grid();
  OutgoingWaves out = captured;
  if (out.spectrum[0][0].size() != grid.size()) init_outgoing(out, grid, captured.probes, potential.asymptotic());
  const std::array<const WaveFunction*, 2> comps{&psi.up, &psi.down};
  for (int c = 0; c < 2; ++c) {
    const WaveFunction pos = to_position(*comps[static_cast<std::size_t>(c)]);
    for (int side = 0; side < 2; ++side) {
      CVec piece(grid.size());
      bool any = false;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool left = grid.x(i) < split;
        if ((side == 0) == left) {
          piece[i] = pos[i];
          any = any || pos[i] != cplx{};
        }
      }
      if (any) accumulate(out, piece, grid, side, c, time, mass);
    }
  }
  return out;
}

WaveFunction free_evolve(const WaveFunction& psi, double time, double mass) {
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  WaveFunction m = to_momentum(psi);
  const Grid1D& grid = m.grid();
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double k = grid.k(j);
    m[j] *= std::polar(1.0, -k * k * time / (2.0 * mass));
  }
  return transform(m, psi.representation());
}

SpinorRun evolve_spinor_captured(const SpinorWave& psi, const PotentialSpec& potential,
                                 const EvolutionParams& params, const CaptureSpec& capture) {
  const SpinorWave start = positional(psi);
  const Grid1D& grid = start.grid();
  if (!start.up.all_finite() || !start.down.all_finite())
    throw Error(ErrorKind::NonFinite, "initial state is not finite");
  const double half_length = 0.5 * grid.length();
  if (capture.enabled() &&
      capture.inner_radius + capture.ramp_width > half_length * (1.0 - 2.0 * kGuardFraction))
    throw Error(ErrorKind::InvalidArgument, "capture zone must end inside the guard band");

  SplitStepper stepper(grid, potential.sample(grid), params, false);
  SpinorRun run{start, {}, params.duration(), params.mass};
  init_outgoing(run.captured, grid, capture.probes, potential.asymptotic());
  CVec up = start.up.data();
  CVec down = start.down.data();

  const std::size_t interval = capture.enabled() ? std::max<std::size_t>(1, capture.interval_steps)
                                                 : std::max<std::size_t>(1, params.n_steps / 16);
  std::vector<double> mask;
  if (capture.enabled()) {
    if (!(capture.rate > 0.0) || !(capture.ramp_width > 0.0))
      throw Error(ErrorKind::InvalidArgument, "capture rate and ramp width must be positive");
    const double tau = params.dt * static_cast<double>(interval);
    mask.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      mask[i] = capture_mask(std::abs(grid.x(i) - capture.center), capture, tau);
  }

  std::array<std::vector<double>, 2> outgoing_filter;
  if (capture.enabled()) {
    if (!(capture.min_wavenumber > 0.0))
      throw Error(ErrorKind::InvalidArgument, "capture min_wavenumber must be positive");
    for (int side = 0; side < 2; ++side) {
      auto& f = outgoing_filter[side];
      f.assign(grid.size(), 0.0);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double k = side == 0 ? -grid.k(j) : grid.k(j);
        if (k <= 0.0 || j == grid.size() / 2) continue;
        // Smooth in k as well: a kink here would leave algebraic tails of
        // every removed piece spread across the whole box.
        f[j] = smooth_step(k / capture.min_wavenumber);
      }
    }
  }

  stepper.run(up, down, interval, [&](std::size_t step) {
    const double t = params.dt * static_cast<double>(step);
    if (capture.enabled()) {
      for (int c = 0; c < 2; ++c) {
        CVec& comp = c == 0 ? up : down;
        for (int side = 0; side < 2; ++side) {
          if (!capture.sides[static_cast<std::size_t>(side)]) continue;
          CVec piece(grid.size());
          bool any = false;
          for (std::size_t i = 0; i < grid.size(); ++i) {
            if (mask[i] == 0.0 || ((grid.x(i) < capture.center) != (side == 0))) continue;
            piece[i] = mask[i] * comp[i];
            any = any || std::norm(piece[i]) > 0.0;
          }
          if (!any) continue;
          // Only the outgoing half of the spectrum leaves; the rest stays on the grid.
          fft::forward(piece);
          const double inv_n = 1.0 / static_cast<double>(grid.size());
          for (std::size_t j = 0; j < piece.size(); ++j) piece[j] *= inv_n * outgoing_filter[side][j];
          fft::backward(piece);
          for (std::size_t i = 0; i < grid.size(); ++i) comp[i] -= piece[i];
          accumulate(run.captured, piece, grid, side, c, t, params.mass);
        }
      }
    }
    check_wrap(up, down, grid);
  });
  run.psi = SpinorWave(WaveFunction(grid, std::move(up)), WaveFunction(grid, std::move(down)));
  return run;
}

SpinorWave evolve_spinor(const SpinorWave& psi, const PotentialSpec& potential, const EvolutionParams& params) {
  return evolve_spinor_captured(psi, potential, params, CaptureSpec{}).psi;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t probe_index(const std::vector<double>& probes, double k) {
  for (std::size_t i = 0; i < probes.size(); ++i)
    if (std::abs(probes[i] - k) <= 1e-12 * std::max(1.0, std::abs(k))) return i;
  throw Error(ErrorKind::InvalidArgument, "wavenumber " + std::to_string(k) + " was not probed");
}

cplx resolved(const OutgoingWaves& out, int side, int channel, double k_out, double k_in, cplx incident) {
  const cplx g = out.probe_values[side][channel][probe_index(out.probes, k_out)];
  return g * k_in / (std::abs(k_out) * incident);
}

}  // namespace

std::vector<double> clock_probe_wavenumbers(const std::vector<double>& incident_k, double clock_momentum,
                                            double mass) {
  std::vector<double> out;
  for (double k : incident_k) {
    out.push_back(k);
    out.push_back(-k);
    const double kd2 = k * k + 2.0 * mass * clock_momentum;
    if (kd2 > 0.0) {
      out.push_back(std::sqrt(kd2));
      out.push_back(-std::sqrt(kd2));
    }
  }
  return out;
}

ScatterAmplitudes resolve_clock_amplitudes(const OutgoingWaves& out, const WaveFunction& initial_up, double k,
                                           double clock_momentum, double mass) {
  const cplx a = fourier_amplitude(to_position(initial_up), k);
  if (std::abs(a) == 0.0) throw Error(ErrorKind::ZeroNorm, "initial packet has no weight at this wavenumber");
  ScatterAmplitudes amps;
  amps.k = clock_wavevectors(mass, k * k / (2.0 * mass), clock_momentum);
  amps.phi_R_up = resolved(out, 1, 0, k, k, a);
  amps.phi_L_up = resolved(out, 0, 0, -k, k, a);
  if (amps.k.down.imag() == 0.0 && amps.k.down.real() > 0.0) {
    const double kd = amps.k.down.real();
    amps.phi_R_down = resolved(out, 1, 1, kd, k, a);
    amps.phi_L_down = resolved(out, 0, 1, -kd, k, a);
  }
  return amps;
}

std::vector<double> booster_probe_wavenumbers(const std::vector<double>& incident_k, const BoosterParams& params) {
  std::vector<double> out;
  for (double k : incident_k) {
    out.push_back(-k);
    out.push_back(std::sqrt(k * k + 2.0 * params.mass * params.V2));
  }
  return out;
}

BoosterAmplitudes resolve_booster_amplitudes(const OutgoingWaves& out, const WaveFunction& initial_up, double k,
                                             const BoosterParams& params) {
  const cplx a = fourier_amplitude(to_position(initial_up), k);
  if (std::abs(a) == 0.0) throw Error(ErrorKind::ZeroNorm, "initial packet has no weight at this wavenumber");
  const double m = params.mass;
  const double e = k * k / (2.0 * m);
  BoosterAmplitudes amps;
  amps.k_up_left = k;
  amps.k_up_right = std::sqrt(cplx(2.0 * m * (e - params.W), 0.0));
  amps.k_down_left = std::sqrt(cplx(2.0 * m * (e - params.V1), 0.0));
  const double k2 = std::sqrt(2.0 * m * (e + params.V2));
  amps.k_down_right = k2;
  // Evanescent amplitudes do not reach the far field and stay zero here.
  amps.phi_L_up = resolved(out, 0, 0, -k, k, a);
  amps.phi_R_down = resolved(out, 1, 1, k2, k, a);
  return amps;
}

// ---------------------------------------------------------------------------

void ClockSpec::validate() const {
  if (!(accuracy > 0.0) || !std::isfinite(accuracy))
    throw Error(ErrorKind::InvalidArgument, "clock accuracy must be positive");
  if (n_slices < 2) throw Error(ErrorKind::SliceCountInsufficient, "need at least two clock slices");
  if (extent() * accuracy < 6.0 - 1e-12)
    throw Error(ErrorKind::SliceCountInsufficient, "clock momentum grid must cover 6/accuracy");
}

std::vector<double> ClockSpec::momenta() const {
  std::vector<double> out(n_slices);
  const double dp = spacing();
  for (std::size_t l = 0; l < n_slices; ++l) out[l] = -extent() + dp * static_cast<double>(l);
  return out;
}

double ClockSpec::spacing() const { return 2.0 * extent() / static_cast<double>(n_slices - 1); }

std::vector<cplx> ClockSpec::weights() const {
  const auto ps = momenta();
  const double norm = std::pow(accuracy * accuracy / kPi, 0.25) * std::sqrt(spacing());
  std::vector<cplx> out(ps.size());
  for (std::size_t l = 0; l < ps.size(); ++l) {
    const double u = ps[l] * accuracy;
    out[l] = norm * std::exp(-0.5 * u * u) * std::polar(1.0, -ps[l] * y0);
  }
  return out;
}

double ClockJointState::detection_probability() const {
  double s = 0.0;
  for (std::size_t l = 0; l < slices.size(); ++l) s += std::norm(weights[l]) * slices[l].down_probability();
  return s;
}

double ClockJointState::total_norm2() const {
  double s = 0.0;
  for (std::size_t l = 0; l < slices.size(); ++l) s += std::norm(weights[l]) * slices[l].norm2();
  return s;
}

ClockJointState evolve_with_clock(const SpinorWave& psi, const ClockSpec& clock, double alpha,
                                  const EvolutionParams& params, const CaptureSpec& capture) {
  clock.validate();
  ClockJointState state;
  state.clock = clock;
  state.momenta = clock.momenta();
  state.weights = clock.weights();
  state.elapsed = params.duration();
  std::vector<std::optional<SpinorRun>> runs(state.momenta.size());
  parallel_for(state.momenta.size(), [&](std::size_t l) {
    runs[l] = evolve_spinor_captured(psi, PotentialSpec::trigger_clock(alpha, state.momenta[l]), params, capture);
  });
  state.slices.reserve(runs.size());
  for (auto& r : runs) state.slices.push_back(std::move(*r));
  return state;
}

namespace {

// Accumulates |sum_l w_l A_l e^{i p_l y_j}|^2 * measure / (2 pi) into rho for
// y_j = y_start + j * dy, with dy = 2 pi / (N dp).
class PointerMarginal {
 public:
  PointerMarginal(const std::vector<double>& momenta, const std::vector<cplx>& weights, double y_start)
      : n_(momenta.size()), rho_(n_, 0.0), buf_(n_) {
    const double dp = momenta[1] - momenta[0];
    dy_ = 2.0 * kPi / (static_cast<double>(n_) * dp);
    pre_.resize(n_);
    for (std::size_t l = 0; l < n_; ++l)
      pre_[l] = weights[l] * std::sqrt(dp / (2.0 * kPi)) * std::polar(1.0, momenta[l] * y_start);
    post_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) post_[j] = std::polar(1.0, momenta[0] * dy_ * static_cast<double>(j));
  }

  template <class AmpFn>
  void add(AmpFn&& amplitude, double measure) {
    bool any = false;
    for (std::size_t l = 0; l < n_; ++l) {
      buf_[l] = pre_[l] * amplitude(l);
      any = any || buf_[l] != cplx{};
    }
    if (!any) return;
    fft::backward(buf_);
    for (std::size_t j = 0; j < n_; ++j) rho_[j] += std::norm(buf_[j] * post_[j]) * measure;
  }

  double dy() const { return dy_; }
  const std::vector<double>& rho() const { return rho_; }

 private:
  std::size_t n_;
  double dy_ = 0.0;
  std::vector<double> rho_;
  CVec buf_, pre_, post_;
};

}  // namespace

ArrivalSeries clock_readout(const ClockJointState& state, const ReadoutOptions& options) {
  if (state.slices.empty()) throw Error(ErrorKind::EmptyReadout, "no clock slices");
  const Grid1D& grid = state.slices.front().psi.grid();
  const double mass = state.slices.front().mass;
  const double elapsed = state.elapsed;

  double lingering = 0.0;
  for (std::size_t l = 0; l < state.slices.size(); ++l) {
    const WaveFunction down = to_position(state.slices[l].psi.down);
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::abs(grid.x(i)) < options.interaction_radius) s += std::norm(down[i]);
    lingering += std::norm(state.weights[l]) * s * grid.dx();
  }
  if (lingering > options.premature_tolerance)
    throw Error(ErrorKind::PrematureReadout, "detected component still inside the interaction region");
  const double detected = state.detection_probability();
  if (!(detected > 1e-14)) throw Error(ErrorKind::EmptyReadout, "no detected (spin-down) probability");

  // Arrival times t = y - y0 on one period of the pointer grid, starting just below zero.
  const double dp = state.momenta[1] - state.momenta[0];
  const double period = 2.0 * kPi / dp;
  const double t_start = -period / 8.0;
  PointerMarginal marginal(state.momenta, state.weights, state.clock.y0 + t_start);

  std::vector<WaveFunction> downs;
  downs.reserve(state.slices.size());
  for (const auto& s : state.slices) downs.push_back(to_position(s.psi.down));
  for (std::size_t i = 0; i < grid.size(); ++i)
    marginal.add([&](std::size_t l) { return downs[l][i]; }, grid.dx());
  for (int side = 0; side < 2; ++side) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double k = grid.k(j);
      marginal.add(
          [&](std::size_t l) {
            const auto& cap = state.slices[l].captured;
            if (cap.spectrum[side][1].empty()) return cplx{};
            const double v = cap.potential[side][1];
            return cap.spectrum[side][1][j] * std::polar(1.0, -(k * k / (2.0 * mass) + v) * elapsed);
          },
          grid.dk());
    }
  }

  ArrivalSeries out;
  out.bin_width = marginal.dy();
  out.times.resize(marginal.rho().size());
  out.probabilities.resize(marginal.rho().size());
  for (std::size_t j = 0; j < out.times.size(); ++j) {
    out.times[j] = t_start + marginal.dy() * static_cast<double>(j);
    out.probabilities[j] = marginal.rho()[j] * marginal.dy();
  }
  out.residual = state.total_norm2() - detected;
  return out;
}

// ---------------------------------------------------------------------------

double CascadeParams::profile(double x) const {
  if (uniform) return -1.0;
  // The singular dip of -x_a^2/x^2 near the origin is capped at -1.
  if (x <= -x_a) return -x_a * x_a / (x * x);
  return -1.0;
}

CascadeState cascade_evolve(const WaveFunction& psi, const ClockSpec& clock, const CascadeParams& params,
                            const EvolutionParams& evolution) {
  clock.validate();
  if (!params.uniform && !(params.x_a > 0.0))
    throw Error(ErrorKind::InvalidArgument, "cascade x_a must be positive");
  const WaveFunction start = to_position(psi);
  const Grid1D& grid = start.grid();
  CascadeState state;
  state.clock = clock;
  state.momenta = clock.momenta();
  state.weights = clock.weights();
  state.params = params;
  state.elapsed = evolution.duration();
  std::vector<double> profile(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) profile[i] = params.profile(grid.x(i));

  std::vector<std::optional<WaveFunction>> out(state.momenta.size());
  parallel_for(state.momenta.size(), [&](std::size_t l) {
    std::vector<SpinMatrix> pot(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pot[i] = SpinMatrix::diag(state.momenta[l] * profile[i], 0.0);
    SplitStepper stepper(grid, pot, evolution, true);
    CVec up = start.data();
    CVec unused;
    stepper.run(up, unused, std::max<std::size_t>(1, evolution.n_steps / 16), [&](std::size_t) {
      if (guard_probability(up, grid) > kWrapTolerance)
        throw Error(ErrorKind::WrapAround, "cascade slice reached the guard band");
    });
    out[l] = WaveFunction(grid, std::move(up));
  });
  for (auto& w : out) state.slices.push_back(std::move(*w));
  return state;
}

ArrivalSeries cascade_readout(const CascadeState& state) {
  if (state.slices.empty()) throw Error(ErrorKind::EmptyReadout, "no clock slices");
  const Grid1D& grid = state.slices.front().grid();
  const double dp = state.momenta[1] - state.momenta[0];
  const double period = 2.0 * kPi / dp;
  // The pointer reading y - y0 = -(time spent at V = -1) lies in [-elapsed, 0];
  // leave room for the pointer width below that when the period allows.
  const double margin = std::max(period / 8.0, std::min(6.0 * state.clock.accuracy, 0.5 * (period - state.elapsed)));
  const double reading_start = -state.elapsed - margin;
  PointerMarginal marginal(state.momenta, state.weights, state.clock.y0 + reading_start);
  double kept = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.x(i) < state.params.readout_threshold) continue;
    marginal.add([&](std::size_t l) { return state.slices[l][i]; }, grid.dx());
  }
  ArrivalSeries out;
  out.bin_width = marginal.dy();
  const std::size_t n = marginal.rho().size();
  out.times.resize(n);
  out.probabilities.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double reading = reading_start + marginal.dy() * static_cast<double>(j);
    out.times[j] = state.elapsed + reading;
    out.probabilities[j] = marginal.rho()[j] * marginal.dy();
    kept += out.probabilities[j];
  }
  double total = 0.0;
  for (std::size_t l = 0; l < state.slices.size(); ++l) total += std::norm(state.weights[l]) * state.slices[l].norm2();
  out.residual = total - kept;
  return out;
}

}  // namespace toa
