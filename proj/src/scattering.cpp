#include "toa/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "toa/error.hpp"
#include "toa/fft.hpp"
#include "toa/quadrature.hpp"

namespace toa {
namespace {

using Mat4 = std::array<std::array<cplx, 4>, 4>;
using Vec4 = std::array<cplx, 4>;

constexpr cplx I{0.0, 1.0};

// Branch with Im >= 0 so that closed channels decay away from the scatterer.
cplx channel_wavenumber(double mass, double kinetic) { return std::sqrt(cplx(2.0 * mass * kinetic, 0.0)); }

Vec4 solve4(Mat4 a, Vec4 b) {
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) == 0.0) throw Error(ErrorKind::InvalidRegime, "singular matching system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < 4; ++r) {
      const cplx f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec4 x{};
  for (int r = 3; r >= 0; --r) {
    cplx s = b[r];
    for (int c = r + 1; c < 4; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

// Transfer matrix of (psi, psi') across a constant region of length `len`
// where psi'' = 2m(M - E) psi.
Mat4 region_transfer(const SpinMatrix& m, double energy, double mass, double len) {
  // Hermitian 2x2 eigendecomposition of A = 2m(M - E).
  const double a = 2.0 * mass * (m.uu - energy);
  const double d = 2.0 * mass * (m.dd - energy);
  const cplx b = 2.0 * mass * m.ud;
  const double mean = 0.5 * (a + d);
  const double half = 0.5 * (a - d);
  const double rad = std::hypot(half, std::abs(b));
  const std::array<double, 2> lam{mean + rad, mean - rad};
  std::array<std::array<cplx, 2>, 2> u{};  // columns are eigenvectors
  if (std::abs(b) < 1e-300) {
    if (a >= d) u = {{{1.0, 0.0}, {0.0, 1.0}}};
    else u = {{{0.0, 1.0}, {1.0, 0.0}}};
  } else {
    for (int c = 0; c < 2; ++c) {
      cplx v0 = b;
      cplx v1 = lam[c] - a;
      const double nv = std::sqrt(std::norm(v0) + std::norm(v1));
      u[0][c] = v0 / nv;
      u[1][c] = v1 / nv;
    }
  }
  std::array<cplx, 2> ch{}, sq{}, qs{};
  for (int c = 0; c < 2; ++c) {
    const cplx q = std::sqrt(cplx(lam[c], 0.0));
    const cplx ql = q * len;
    ch[c] = std::cosh(ql);
    sq[c] = std::abs(ql) < 1e-8 ? cplx(len) * (1.0 + ql * ql / 6.0) : std::sinh(ql) / q;
    qs[c] = q * std::sinh(ql);
  }
  auto rebuild = [&](const std::array<cplx, 2>& diag) {
    std::array<std::array<cplx, 2>, 2> r{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int c = 0; c < 2; ++c) r[i][j] += u[i][c] * diag[c] * std::conj(u[j][c]);
    return r;
  };
  const auto cm = rebuild(ch);
  const auto sm = rebuild(sq);
  const auto dm = rebuild(qs);
  Mat4 t{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      t[i][j] = cm[i][j];
      t[i][j + 2] = sm[i][j];
      t[i + 2][j] = dm[i][j];
      t[i + 2][j + 2] = cm[i][j];
    }
  return t;
}

Mat4 delta_transfer(const ChannelDelta& delta, double mass) {
  Mat4 t = identity4();
  const double g = 2.0 * mass * delta.strength;
  t[2][0] = g * delta.matrix.uu;
  t[2][1] = g * delta.matrix.ud;
  t[3][0] = g * delta.matrix.du();
  t[3][1] = g * delta.matrix.dd;
  return t;
}

bool is_diagonal(const SpinMatrix& m) { return std::abs(m.ud) == 0.0; }

}  // namespace

void TriggerClockParams::validate() const {
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  if (!(kinetic_energy > 0.0)) throw Error(ErrorKind::DegenerateChannel, "incident kinetic energy must be positive");
  if (!(clock_momentum >= 0.0)) throw Error(ErrorKind::InvalidArgument, "clock momentum must be non-negative");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::InvalidArgument, "alpha must be finite and non-negative (use clock_scatter_limit)");
}

double ScatterAmplitudes::flux_ratio() const {
  const double ku = k.up.real();
  const double kd = k.down.real();
  return (ku * (std::norm(phi_L_up) + std::norm(phi_R_up)) + kd * (std::norm(phi_L_down) + std::norm(phi_R_down))) /
         ku;
}

double trigger_flip_probability(int n_spins) {
  if (n_spins < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trigger");
  return 1.0 - std::ldexp(1.0, -n_spins);
}

ChannelWavevectors clock_wavevectors(double mass, double kinetic_energy, double clock_momentum) {
  return {channel_wavenumber(mass, kinetic_energy), channel_wavenumber(mass, kinetic_energy + clock_momentum)};
}

ScatterAmplitudes clock_scatter_general(const TriggerClockParams& params) {
  if (!(params.mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  if (!(params.kinetic_energy > 0.0))
    throw Error(ErrorKind::DegenerateChannel, "incident kinetic energy must be positive");
  if (params.kinetic_energy + params.clock_momentum == 0.0)
    throw Error(ErrorKind::DegenerateChannel, "down channel exactly at threshold");
  ScatterAmplitudes out;
  out.k = clock_wavevectors(params.mass, params.kinetic_energy, params.clock_momentum);
  if (params.alpha == 0.0) {
    out.phi_R_up = 1.0;
    return out;
  }
  const cplx ratio = out.k.up / out.k.down;
  const cplx u = 2.0 * I * out.k.up / (params.mass * params.alpha);
  out.phi_R_up = (u - ratio) / (u - 1.0 - ratio);
  out.phi_R_down = ratio * (out.phi_R_up - 1.0);
  out.phi_L_down = out.phi_R_down;
  out.phi_L_up = out.phi_R_up - 1.0;
  return out;
}

ScatterAmplitudes clock_scatter(const TriggerClockParams& params) {
  params.validate();
  return clock_scatter_general(params);
}

ScatterAmplitudes clock_scatter_limit(double kinetic_energy, double clock_momentum, double mass) {
  if (!(kinetic_energy > 0.0) || !(kinetic_energy + clock_momentum > 0.0) || !(mass > 0.0))
    throw Error(ErrorKind::InvalidArgument, "limit requires E_k > 0, an open down channel and m > 0");
  ScatterAmplitudes out;
  out.k = clock_wavevectors(mass, kinetic_energy, clock_momentum);
  const double ratio = out.k.up.real() / out.k.down.real();
  out.phi_R_up = ratio / (1.0 + ratio);
  out.phi_R_down = -ratio / (1.0 + ratio);
  out.phi_L_up = out.phi_R_up - 1.0;
  out.phi_L_down = out.phi_R_down;
  return out;
}

double detection_probability(const ScatterAmplitudes& amps) {
  const double kd = amps.k.down.real();
  if (kd <= 0.0) return 0.0;
  return kd / amps.k.up.real() * (std::norm(amps.phi_R_down) + std::norm(amps.phi_L_down));
}

double detection_probability_limit(double kinetic_energy, double clock_momentum, double mass) {
  const auto k = clock_wavevectors(mass, kinetic_energy, clock_momentum);
  if (k.down.real() <= 0.0) return 0.0;
  const double ku = k.up.real();
  const double kd = k.down.real();
  return 2.0 * ku * kd / ((ku + kd) * (ku + kd));
}

double clock_detection_average(double kinetic_energy, double accuracy, double mass, double alpha,
                               double square_width) {
  if (!(kinetic_energy > 0.0) || !(accuracy > 0.0) || !(mass > 0.0) || !(alpha > 0.0))
    throw Error(ErrorKind::InvalidArgument, "energy, accuracy, mass and alpha must be positive");
  static const GaussLegendre rule(16);
  const double extent = 9.0 / accuracy;
  // The integrand has a kink where the down channel opens, p = -E_k.
  const double lo = std::max(-extent, -kinetic_energy);
  if (lo >= extent) return 0.0;
  auto integrand = [&](double p) {
    double detect = 0.0;
    if (std::isinf(alpha)) {
      detect = detection_probability_limit(kinetic_energy, p, mass);
    } else if (square_width > 0.0) {
      detect = detection_probability(clock_scatter_square({mass, alpha, kinetic_energy, p}, square_width));
    } else {
      detect = detection_probability(clock_scatter_general({mass, alpha, kinetic_energy, p}));
    }
    return detect * accuracy / std::sqrt(kPi) * std::exp(-p * p * accuracy * accuracy);
  };
  // The limit law has a square-root edge at p = -E_k; refine next to it.
  const double edge = std::min(extent, lo + std::min(kinetic_energy, 1.0 / accuracy));
  return rule.integrate(integrand, lo, edge, 200) + rule.integrate(integrand, edge, extent, 400);
}

void StationaryReadoutSpec::validate() const {
  if (!(accuracy > 0.0) || !(mass > 0.0) || !(alpha > 0.0) || !(period > 0.0) || !std::isfinite(y0))
    throw Error(ErrorKind::InvalidArgument, "readout needs positive accuracy, mass, alpha and period");
  if (wavenumber_max < 0.0 || wavenumber_points < 16)
    throw Error(ErrorKind::InvalidArgument, "readout wavenumber grid too small");
}

ArrivalSeries stationary_clock_readout(const std::function<cplx(double)>& incident, double incident_k_max,
                                       const StationaryReadoutSpec& spec) {
  spec.validate();
  if (!(incident_k_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "incident wavenumber range must be positive");
  const double m = spec.mass;
  const double extent = 6.0 / spec.accuracy;
  // Clock momenta on a uniform grid fine enough that one pointer period covers spec.period.
  const auto n_p = static_cast<std::size_t>(std::ceil(2.0 * extent * spec.period / (2.0 * kPi))) + 1;
  const double dp = 2.0 * extent / static_cast<double>(n_p - 1);
  const double dy = 2.0 * kPi / (static_cast<double>(n_p) * dp);
  const double t_start = -static_cast<double>(n_p) * dy / 8.0;

  std::vector<double> ps(n_p);
  CVec pre(n_p);
  const double chi_norm = std::pow(spec.accuracy * spec.accuracy / kPi, 0.25);
  for (std::size_t l = 0; l < n_p; ++l) {
    ps[l] = -extent + dp * static_cast<double>(l);
    const double u = ps[l] * spec.accuracy;
    const cplx chi = chi_norm * std::exp(-0.5 * u * u) * std::polar(1.0, -ps[l] * spec.y0);
    pre[l] = chi * (dp / std::sqrt(2.0 * kPi)) * std::polar(1.0, ps[l] * (spec.y0 + t_start));
  }
  CVec post(n_p);
  for (std::size_t j = 0; j < n_p; ++j) post[j] = std::polar(1.0, ps[0] * dy * static_cast<double>(j));

  const double q_max = spec.wavenumber_max > 0.0
                           ? spec.wavenumber_max
                           : std::sqrt(incident_k_max * incident_k_max + 2.0 * m * extent);
  const double h = q_max / static_cast<double>(spec.wavenumber_points);
  std::vector<double> rho(n_p, 0.0);
  CVec right(n_p), left(n_p);
  for (std::size_t iq = 0; iq < spec.wavenumber_points; ++iq) {
    const double q = h * (static_cast<double>(iq) + 0.5);
    bool any = false;
    for (std::size_t l = 0; l < n_p; ++l) {
      right[l] = left[l] = cplx{};
      const double k2 = q * q - 2.0 * m * ps[l];
      if (k2 <= 0.0) continue;
      const double k = std::sqrt(k2);
      if (k > incident_k_max) continue;
      const double energy = 0.5 * k2 / m;
      const ScatterAmplitudes a = std::isinf(spec.alpha)
                                      ? clock_scatter_limit(energy, ps[l], m)
                                      : clock_scatter_general({m, spec.alpha, energy, ps[l]});
      const cplx common = pre[l] * incident(k) * (q / k);
      right[l] = common * a.phi_R_down;
      left[l] = common * a.phi_L_down;
      any = true;
    }
    if (!any) continue;
    fft::backward(right);
    fft::backward(left);
    for (std::size_t j = 0; j < n_p; ++j)
      rho[j] += (std::norm(right[j] * post[j]) + std::norm(left[j] * post[j])) * h;
  }

  // Incident norm on the same kind of grid, for the residual.
  const std::size_t n_k = 4 * spec.wavenumber_points;
  const double hk = incident_k_max / static_cast<double>(n_k);
  double total = 0.0;
  for (std::size_t i = 0; i < n_k; ++i) total += std::norm(incident(hk * (static_cast<double>(i) + 0.5))) * hk;

  ArrivalSeries out;
  out.bin_width = dy;
  out.times.resize(n_p);
  out.probabilities.resize(n_p);
  double detected = 0.0;
  for (std::size_t j = 0; j < n_p; ++j) {
    out.times[j] = t_start + dy * static_cast<double>(j);
    out.probabilities[j] = rho[j] * dy;
    detected += out.probabilities[j];
  }
  out.residual = total - detected;
  return out;
}

void BoosterParams::validate() const {
  if (!(mass > 0.0) || !(alpha > 0.0) || !(W > 0.0) || !(V1 > 0.0) || !(V2 > 0.0))
    throw Error(ErrorKind::InvalidArgument, "booster constants must be positive");
  if (!(energy > 0.0 && energy < W && energy < V1))
    throw Error(ErrorKind::InvalidRegime, "booster needs 0 < E < W and E < V1");
}

double BoosterAmplitudes::reflected_up() const { return std::norm(phi_L_up); }

double BoosterAmplitudes::transmitted_down() const {
  return k_down_right.real() / k_up_left.real() * std::norm(phi_R_down);
}

BoosterAmplitudes booster_scatter(const BoosterParams& params) {
  params.validate();
  const double m = params.mass;
  BoosterAmplitudes out;
  out.k_up_left = channel_wavenumber(m, params.energy);
  out.k_up_right = channel_wavenumber(m, params.energy - params.W);
  out.k_down_left = channel_wavenumber(m, params.energy - params.V1);
  out.k_down_right = channel_wavenumber(m, params.energy + params.V2);
  const cplx k = out.k_up_left;
  const cplx kappa_w = -I * out.k_up_right;
  const cplx kappa_1 = -I * out.k_down_left;
  const cplx k2 = out.k_down_right;
  const double g = 2.0 * m * params.alpha;
  const cplx down_factor = g / (I * k2 - kappa_1);
  out.phi_R_up = 2.0 * I * k / (I * k - kappa_w - g * down_factor);
  out.phi_L_up = out.phi_R_up - 1.0;
  out.phi_R_down = down_factor * out.phi_R_up;
  out.phi_L_down = out.phi_R_down;
  return out;
}

void PiecewiseChannels::validate() const {
  if (regions.size() != boundaries.size() + 1)
    throw Error(ErrorKind::InvalidArgument, "need exactly one more region than boundaries");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i] > boundaries[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "region boundaries must be strictly increasing");
  if (!is_diagonal(regions.front()) || !is_diagonal(regions.back()))
    throw Error(ErrorKind::InvalidArgument, "asymptotic regions must be diagonal");
}

double ChannelScattering::flux_ratio() const {
  double out = 0.0;
  for (int c = 0; c < 2; ++c)
    out += k_left[c].real() * std::norm(reflected[c]) + k_right[c].real() * std::norm(transmitted[c]);
  return out / k_left[incident_channel].real();
}

ChannelScattering scatter_piecewise(const PiecewiseChannels& potential, double energy, double mass,
                                    int incident_channel) {
  potential.validate();
  if (incident_channel != 0 && incident_channel != 1)
    throw Error(ErrorKind::InvalidArgument, "incident channel must be 0 or 1");

  // Walk left to right through boundaries and delta positions.
  struct Event {
    double x;
    int boundary;  // index into boundaries, or -1
    int delta;     // index into deltas, or -1
  };
  std::vector<Event> events;
  for (std::size_t i = 0; i < potential.boundaries.size(); ++i)
    events.push_back({potential.boundaries[i], static_cast<int>(i), -1});
  for (std::size_t i = 0; i < potential.deltas.size(); ++i)
    events.push_back({potential.deltas[i].position, -1, static_cast<int>(i)});
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
  const double x_start = events.empty() ? 0.0 : events.front().x;
  const double x_end = events.empty() ? 0.0 : events.back().x;

  Mat4 transfer = identity4();
  std::size_t region = 0;
  double x = x_start;
  for (const Event& e : events) {
    if (e.x > x) {
      transfer = multiply(region_transfer(potential.regions[region], energy, mass, e.x - x), transfer);
      x = e.x;
    }
    if (e.boundary >= 0) region = static_cast<std::size_t>(e.boundary) + 1;
    if (e.delta >= 0) transfer = multiply(delta_transfer(potential.deltas[static_cast<std::size_t>(e.delta)], mass), transfer);
  }

  ChannelScattering out;
  out.incident_channel = incident_channel;
  const SpinMatrix& left = potential.regions.front();
  const SpinMatrix& right = potential.regions.back();
  out.k_left = {channel_wavenumber(mass, energy - left.uu), channel_wavenumber(mass, energy - left.dd)};
  out.k_right = {channel_wavenumber(mass, energy - right.uu), channel_wavenumber(mass, energy - right.dd)};
  if (out.k_left[incident_channel].imag() != 0.0 || out.k_left[incident_channel].real() <= 0.0)
    throw Error(ErrorKind::InvalidRegime, "incident channel is closed");

  // Left state = s0 + B r, right state = C t; impose transfer * left = right.
  Vec4 s0{};
  {
    const cplx kl = out.k_left[incident_channel];
    const cplx ph = std::exp(I * kl * x_start);
    s0[incident_channel] = ph;
    s0[incident_channel + 2] = I * kl * ph;
  }
  Mat4 sys{};
  for (int c = 0; c < 2; ++c) {
    const cplx kl = out.k_left[c];
    const cplx em = std::exp(-I * kl * x_start);
    // column c: reflected amplitude in channel c
    for (int r = 0; r < 4; ++r) sys[r][c] = transfer[r][c] * em + transfer[r][c + 2] * (-I * kl * em);
    const cplx kr = out.k_right[c];
    const cplx ep = std::exp(I * kr * x_end);
    sys[c][c + 2] -= ep;
    sys[c + 2][c + 2] -= I * kr * ep;
  }
  Vec4 rhs{};
  for (int r = 0; r < 4; ++r) {
    cplx s{};
    for (int c = 0; c < 4; ++c) s += transfer[r][c] * s0[c];
    rhs[r] = -s;
  }
  const Vec4 sol = solve4(sys, rhs);
  out.reflected = {sol[0], sol[1]};
  out.transmitted = {sol[2], sol[3]};
  return out;
}

ScatterAmplitudes clock_scatter_square(const TriggerClockParams& params, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "barrier width must be positive");
  const SpinMatrix outside = SpinMatrix::diag(params.clock_momentum, 0.0);
  PiecewiseChannels pot;
  pot.boundaries = {-0.5 * width, 0.5 * width};
  pot.regions = {outside, outside + (params.alpha / width) * SpinMatrix::up_x_projector(), outside};
  const ChannelScattering s =
      scatter_piecewise(pot, params.kinetic_energy + params.clock_momentum, params.mass, 0);
  ScatterAmplitudes out;
  out.k = {s.k_left[0], s.k_left[1]};
  out.phi_L_up = s.reflected[0];
  out.phi_L_down = s.reflected[1];
  out.phi_R_up = s.transmitted[0];
  out.phi_R_down = s.transmitted[1];
  return out;
}

}  // namespace toa
