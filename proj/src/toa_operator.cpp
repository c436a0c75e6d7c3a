#include "toa/toa_operator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "toa/error.hpp"
#include "toa/fft.hpp"
#include "toa/parallel.hpp"
#include "toa/quadrature.hpp"
#include "toa/scattering.hpp"

namespace toa {
namespace {

constexpr double kAliasTolerance = 1e-10;
constexpr double kKickSupportTolerance = 1e-6;
constexpr std::size_t kMaxDenseKick = 2048;

bool power_of_two(std::size_t n) { return n >= 16 && (n & (n - 1)) == 0; }

// psi~(k) at arbitrary k from position samples, dx/sqrt(2 pi) sum psi_i e^{-i k x_i}.
cplx dtft(const WaveFunction& position, double k) {
  const Grid1D& grid = position.grid();
  const cplx step = std::polar(1.0, -k * grid.dx());
  cplx phase = std::polar(1.0, -k * grid.x_min());
  cplx s{};
  for (std::size_t i = 0; i < position.size(); ++i) {
    s += position[i] * phase;
    phase *= step;
  }
  return s * (grid.dx() / std::sqrt(2.0 * kPi));
}

double normalization(const WaveFunction& psi) {
  const double n = psi.norm2();
  if (!(n > 0.0)) throw Error(ErrorKind::ZeroNorm, "state has zero norm");
  return n;
}

}  // namespace

void CutoffProfile::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorKind::InvalidArgument, "cutoff epsilon must be positive");
}

double CutoffProfile::operator()(double k) const {
  const double u = std::abs(k) / epsilon;
  if (u >= 1.0) return 1.0;
  if (u <= 0.0) return 0.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

std::vector<double> CutoffProfile::sample(const Grid1D& grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = (*this)(grid.k(j));
  return out;
}

cplx toa_eigenfunction(double T, double k, double mass) {
  if (k == 0.0) return {};
  const cplx value = std::polar(std::sqrt(std::abs(k) / (2.0 * kPi * mass)), T * k * k / (2.0 * mass));
  return k > 0.0 ? value : cplx(0.0, 1.0) * value;
}

WaveFunction toa_eigenfunction(const Grid1D& grid, double T, double mass) {
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  CVec v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = toa_eigenfunction(T, grid.k(j), mass);
  return WaveFunction(grid, std::move(v), Representation::Momentum);
}

void ToaWindow::validate() const {
  if (!power_of_two(n)) throw Error(ErrorKind::InvalidArgument, "arrival-time window size must be a power of two >= 16");
  if (!(dT > 0.0) || !std::isfinite(t_first)) throw Error(ErrorKind::InvalidArgument, "invalid arrival-time window");
}

double ToaWindow::energy_cover() const { return 2.0 * kPi / dT; }

double ToaState::norm2() const {
  double s = 0.0;
  for (const auto& v : g) s += std::norm(v);
  return s * dT;
}

double ToaState::mean_time() const {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += times[i] * std::norm(g[i]);
  return s * dT / norm2();
}

double ToaState::peak_time() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (std::norm(g[i]) > std::norm(g[best])) best = i;
  return times[best];
}

ToaState toa_transform(const WaveFunction& psi, double mass, const ToaWindow& window) {
  window.validate();
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  const WaveFunction momentum = to_momentum(psi);
  const Grid1D& grid = momentum.grid();
  const double cover = window.energy_cover();
  double above = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double k = grid.k(j);
    if (k * k / (2.0 * mass) >= cover) above += std::norm(momentum[j]);
  }
  above *= grid.dk();
  if (above > kAliasTolerance * normalization(momentum))
    throw Error(ErrorKind::Aliasing, "state energy exceeds the arrival-time window resolution");

  const WaveFunction position = to_position(psi);
  const std::size_t n = window.n;
  const double dE = cover / static_cast<double>(n);
  CVec b(n);
  parallel_for(n, [&](std::size_t s) {
    const double E = (static_cast<double>(s) + 0.5) * dE;
    const double k = std::sqrt(2.0 * mass * E);
    const double jac = std::sqrt(mass / k);
    const cplx f = jac * (dtft(position, k) - cplx(0.0, 1.0) * dtft(position, -k));
    b[s] = f * std::polar(1.0, -E * window.t_first);
  });
  fft::forward(b);
  ToaState out;
  out.dT = window.dT;
  out.times.resize(n);
  out.g.resize(n);
  const double scale = dE / std::sqrt(2.0 * kPi);
  for (std::size_t l = 0; l < n; ++l) {
    out.times[l] = window.t_first + window.dT * static_cast<double>(l);
    out.g[l] = b[l] * std::polar(scale, -kPi * static_cast<double>(l) / static_cast<double>(n));
  }
  return out;
}

cplx KernelTestFunction::operator()(double T) const {
  const double u = (T - center) / width;
  return std::polar(std::exp(-0.5 * u * u), frequency * T);
}

cplx KernelTestFunction::derivative(double T) const {
  return (*this)(T) * cplx(-(T - center) / (width * width), frequency);
}

KernelCheck overlap_kernel_check(const KernelTestFunction& f, const KernelTestFunction& g, double mass) {
  if (!(f.width > 0.0) || !(g.width > 0.0) || !(mass > 0.0))
    throw Error(ErrorKind::InvalidArgument, "test-function widths and mass must be positive");
  constexpr double reach = 9.0;
  constexpr double per_width = 24.0;
  auto nodes = [&](const KernelTestFunction& h) {
    const double step = h.width / per_width;
    const auto count = static_cast<std::size_t>(std::ceil(2.0 * reach * per_width));
    std::vector<double> t(count + 1);
    for (std::size_t i = 0; i <= count; ++i) t[i] = h.center - reach * h.width + step * static_cast<double>(i);
    return std::pair{t, step};
  };

  // Smeared states in momentum space: Psi(k) = integral h(T) <k|T> dT.
  const auto [tf, df] = nodes(f);
  const auto [tg, dg] = nodes(g);
  auto smeared = [&](const KernelTestFunction& h, const std::vector<double>& t, double dt, double k) {
    cplx s{};
    for (double T : t) s += h(T) * toa_eigenfunction(T, k, mass);
    return s * dt;
  };
  const double e_cut = std::max(std::abs(f.frequency) + reach / f.width, std::abs(g.frequency) + reach / g.width);
  const double k_cut = std::sqrt(2.0 * mass * e_cut);
  const double t_far = std::max({std::abs(tf.front()), std::abs(tf.back()), std::abs(tg.front()), std::abs(tg.back())});
  const auto panels = static_cast<std::size_t>(std::ceil(k_cut * t_far * k_cut / mass)) + 64;
  static const GaussLegendre rule(16);
  auto integrand = [&](double k) { return std::conj(smeared(f, tf, df, k)) * smeared(g, tg, dg, k); };
  const cplx numeric = rule.integrate(integrand, -k_cut, 0.0, panels) + rule.integrate(integrand, 0.0, k_cut, panels);

  // Closed form: delta part plus -(i/pi) PV integral, the PV taken as the even
  // integrand [g(T-u) - g(T+u)]/u on u >= 0 (trapezoid is spectrally accurate).
  const double du = g.width / per_width;
  double u_far = 0.0;
  for (double T : tf) u_far = std::max(u_far, std::abs(T - g.center) + reach * g.width);
  const auto nu = static_cast<std::size_t>(std::ceil(u_far / du));
  cplx delta_part{};
  cplx pv_part{};
  for (double T : tf) {
    const cplx cf = std::conj(f(T));
    delta_part += cf * g(T);
    cplx hilbert = -g.derivative(T);  // half of the u = 0 limit -2 g'(T)
    for (std::size_t i = 1; i <= nu; ++i) {
      const double u = du * static_cast<double>(i);
      hilbert += (g(T - u) - g(T + u)) / u;
    }
    pv_part += cf * hilbert * du;
  }
  delta_part *= df;
  pv_part *= df;
  const cplx closed = delta_part - cplx(0.0, 1.0 / kPi) * pv_part;
  return {numeric, closed, std::abs(numeric - closed)};
}

RegularizedToa::RegularizedToa(const Grid1D& grid, CutoffProfile cutoff, double mass)
    : grid_(grid), cutoff_(cutoff), mass_(mass) {
  cutoff_.validate();
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  profile_ = cutoff_.sample(grid_);
  weight_.resize(grid_.size());
  signed_weight_.resize(grid_.size());
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double k = std::abs(grid_.k(j));
    weight_[j] = k > 0.0 ? profile_[j] / std::sqrt(k) : 0.0;
    signed_weight_[j] = grid_.k(j) < 0.0 ? -weight_[j] : weight_[j];
  }
}

WaveFunction RegularizedToa::apply(const WaveFunction& psi) const {
  const WaveFunction m = to_momentum(psi);
  if (!(m.grid() == grid_)) throw Error(ErrorKind::InvalidArgument, "state lives on a different grid");
  const std::size_t n = grid_.size();
  // One ordering of -(m/2)(W_s x W + W x W_s); `first` multiplies before x.
  auto half = [&](bool signed_first) {
    CVec v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = (signed_first ? signed_weight_[j] : weight_[j]) * m[j];
    WaveFunction pos = to_position(WaveFunction(grid_, std::move(v), Representation::Momentum));
    for (std::size_t i = 0; i < n; ++i) pos[i] *= grid_.x(i);
    WaveFunction out = to_momentum(pos);
    for (std::size_t j = 0; j < n; ++j) out[j] *= signed_first ? weight_[j] : signed_weight_[j];
    return out;
  };
  WaveFunction out = half(false);
  out += half(true);
  out *= -0.5 * mass_;
  return out;
}

double RegularizedToa::expectation(const WaveFunction& psi) const {
  const WaveFunction m = to_momentum(psi);
  return std::real(inner(m, apply(m))) / normalization(m);
}

cplx RegularizedToa::commutator_expectation(const WaveFunction& psi) const {
  const WaveFunction m = to_momentum(psi);
  WaveFunction hm = m;
  for (std::size_t j = 0; j < hm.size(); ++j) {
    const double k = grid_.k(j);
    hm[j] *= k * k / (2.0 * mass_);
  }
  return (inner(m, apply(hm)) - inner(hm, apply(m))) / normalization(m);
}

double RegularizedToa::cutoff_moment(const WaveFunction& psi, int power) const {
  const WaveFunction m = to_momentum(psi);
  double s = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) s += std::pow(profile_[j], power) * std::norm(m[j]);
  return s * grid_.dk() / normalization(m);
}

double RegularizedToa::weight_below_cutoff(const WaveFunction& psi) const {
  const WaveFunction m = to_momentum(psi);
  double s = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j)
    if (std::abs(grid_.k(j)) < cutoff_.epsilon) s += std::norm(m[j]);
  return s * grid_.dk() / normalization(m);
}

DriftResult toa_drift(const RegularizedToa& op, const WaveFunction& psi, double t) {
  DriftResult r;
  r.initial = op.expectation(psi);
  r.closed_form = r.initial + t * (1.0 - op.cutoff_moment(psi, 2));
  r.evolved = op.expectation(free_evolve(psi, t, op.mass())) + t;
  r.slope = t != 0.0 ? (r.evolved - r.initial) / t : 0.0;
  return r;
}

ToaKick::ToaKick(const RegularizedToa& op) : op_(op) {
  const Grid1D& grid = op.grid();
  const std::size_t n = grid.size();
  if (n > kMaxDenseKick) throw Error(ErrorKind::InvalidArgument, "dense kick is limited to 2048 grid points");
  Eigen::MatrixXcd matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t j) {
    CVec e(n);
    e[j] = 1.0;
    const WaveFunction col = op.apply(WaveFunction(grid, std::move(e), Representation::Momentum));
    for (std::size_t i = 0; i < n; ++i) matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  });
  const Eigen::MatrixXcd hermitian = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NonFinite, "eigendecomposition of T' failed");
  eigenvalues_.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  vectors_.assign(solver.eigenvectors().data(), solver.eigenvectors().data() + n * n);
}

WaveFunction ToaKick::apply(const WaveFunction& psi, double q) const {
  const WaveFunction m = to_momentum(psi);
  const Grid1D& grid = op_.grid();
  if (!(m.grid() == grid)) throw Error(ErrorKind::InvalidArgument, "state lives on a different grid");
  if (op_.weight_below_cutoff(m) > kKickSupportTolerance)
    throw Error(ErrorKind::SupportViolation, "state has weight below the cutoff, where T' does not shift energy");
  double peak = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) peak = std::max(peak, std::norm(m[j]));
  double e_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double k = grid.k(j);
    if (std::norm(m[j]) > 1e-12 * peak) e_min = std::min(e_min, k * k / (2.0 * op_.mass()));
  }
  if (!(q > -e_min)) throw Error(ErrorKind::InvalidArgument, "kick must satisfy q > -E_min");

  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::Map<const Eigen::MatrixXcd> v(vectors_.data(), n, n);
  Eigen::Map<const Eigen::VectorXcd> in(m.data().data(), n);
  Eigen::VectorXcd c = v.adjoint() * in;
  for (Eigen::Index i = 0; i < n; ++i) c[i] *= std::polar(1.0, -q * eigenvalues_[static_cast<std::size_t>(i)]);
  const Eigen::VectorXcd result = v * c;
  return WaveFunction(grid, CVec(result.data(), result.data() + n), Representation::Momentum);
}

WaveFunction energy_shift_kick(const RegularizedToa& op, const WaveFunction& psi, double q) {
  if (q == 0.0) return to_momentum(psi);
  return ToaKick(op).apply(psi, q);
}

void CoherentToaSpec::validate() const {
  if (!(delta > 0.0) || !(mass > 0.0) || !std::isfinite(T0))
    throw Error(ErrorKind::InvalidArgument, "coherent state needs delta > 0 and mass > 0");
}

WaveFunction coherent_toa_state(const Grid1D& grid, const CoherentToaSpec& spec) {
  spec.validate();
  const double m = spec.mass;
  const double k_top = std::sqrt(2.0 * m * 6.0 / spec.delta);
  if (k_top > 0.9 * grid.k_max()) throw Error(ErrorKind::Resolution, "grid cannot represent energies ~ 1/Delta");
  if (grid.dk() > std::sqrt(2.0 * m / spec.delta) / 32.0)
    throw Error(ErrorKind::Resolution, "momentum spacing too coarse for the coherent state");
  const double reach = std::abs(spec.T0) * std::sqrt(2.0 * m * 5.0 / spec.delta) / m;
  if (reach > 0.9 * std::min(-grid.x_min(), grid.x_max()))
    throw Error(ErrorKind::Resolution, "coherent state does not fit in the box");
  CVec v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double k = grid.k(j);
    if (k <= 0.0) continue;
    const double E = k * k / (2.0 * m);
    v[j] = toa_eigenfunction(spec.T0, k, m) * std::exp(-0.5 * spec.delta * spec.delta * E * E);
  }
  WaveFunction out(grid, std::move(v), Representation::Momentum);
  out *= 1.0 / std::sqrt(normalization(out));
  return out;
}

double coherent_mean_energy(const CoherentToaSpec& spec) {
  spec.validate();
  return 1.0 / (std::sqrt(kPi) * spec.delta);
}

double flux_average_detection(const WaveFunction& psi, double alpha, double accuracy, double mass,
                              double square_width) {
  const WaveFunction m = to_momentum(psi);
  const Grid1D& grid = m.grid();
  double peak = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) peak = std::max(peak, std::norm(m[j]));
  std::vector<double> part(m.size(), 0.0);
  parallel_for(m.size(), [&](std::size_t j) {
    const double k = grid.k(j);
    const double w = std::norm(m[j]);
    if (k <= 0.0 || w < 1e-14 * peak) return;
    part[j] = w * clock_detection_average(k * k / (2.0 * mass), accuracy, mass, alpha, square_width);
  });
  double s = 0.0;
  for (double p : part) s += p;
  return s * grid.dk() / normalization(m);
}

EigenstateTriggerResult eigenstate_trigger_experiment(const Grid1D& grid, const EigenstateTriggerSetup& setup) {
  const WaveFunction psi = coherent_toa_state(grid, setup.state);
  const ClockJointState joint =
      evolve_with_clock(SpinorWave::spin_up(to_position(psi)), setup.clock, setup.alpha, setup.evolution, setup.capture);
  EigenstateTriggerResult r;
  const double total = joint.total_norm2();
  r.detection = joint.detection_probability() / total;
  double on_grid = 0.0;
  for (std::size_t l = 0; l < joint.slices.size(); ++l)
    on_grid += std::norm(joint.weights[l]) * joint.slices[l].psi.up.norm2();
  r.undetected_on_grid = on_grid / total;
  const double width = PotentialSpec::trigger(setup.alpha).delta_width(grid, setup.alpha);
  r.oracle = flux_average_detection(psi, setup.alpha, setup.clock.accuracy, setup.state.mass, width);
  r.delta_oracle = flux_average_detection(psi, setup.alpha, setup.clock.accuracy, setup.state.mass);
  return r;
}

}  // namespace toa
