#include "toa/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "toa/error.hpp"
#include "toa/fft.hpp"

namespace toa {
namespace {

constexpr double kSupportTolerance = 1e-8;
constexpr double kEdgeFraction = 1e-8;

double inside_weight(const CVec& v, std::size_t first, double dx) {
  double s = 0.0;
  for (std::size_t i = first; i < v.size(); ++i) s += std::norm(v[i]);
  return s * dx;
}

// Sum of c_j e^{i k_j x} with c in continuous-amplitude convention.
cplx synthesize(const WaveFunction& momentum, double x, bool derivative) {
  const Grid1D& grid = momentum.grid();
  cplx s{};
  for (std::size_t j = 0; j < momentum.size(); ++j) {
    const double k = grid.k(j);
    cplx term = momentum[j] * std::polar(1.0, k * x);
    if (derivative) term *= (j == grid.size() / 2) ? cplx{} : cplx(0.0, k);
    s += term;
  }
  return s * (grid.dk() / std::sqrt(2.0 * kPi));
}

}  // namespace

void MeasurementSchedule::validate() const {
  if (!std::isfinite(x_A)) throw Error(ErrorKind::InvalidArgument, "detector position must be finite");
  if (!(delta > 0.0) || !(t_max > 0.0) || !(evolution.dt > 0.0) || !(evolution.mass > 0.0))
    throw Error(ErrorKind::InvalidArgument, "delta, t_max, dt and mass must be positive");
  const double ratio = delta / evolution.dt;
  if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw Error(ErrorKind::InvalidArgument, "delta must be an integer multiple of dt");
  if (t_max / delta > 1e6) throw Error(ErrorKind::InvalidArgument, "t_max / delta exceeds 1e6 looks");
}

std::size_t MeasurementSchedule::count() const {
  return static_cast<std::size_t>(std::floor(t_max / delta + 1e-9));
}

ProjectedParts project_plus(const WaveFunction& psi, double x_A) {
  const WaveFunction pos = to_position(psi);
  const Grid1D& grid = pos.grid();
  const std::size_t first = grid.nearest_index(x_A);
  CVec in(grid.size());
  CVec out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) (i >= first ? in[i] : out[i]) = pos[i];
  return {WaveFunction(grid, std::move(in)), WaveFunction(grid, std::move(out))};
}

ArrivalSeries repeated_measurement_arrival(const WaveFunction& psi0, const MeasurementSchedule& schedule) {
  schedule.validate();
  const WaveFunction start = to_position(psi0);
  const Grid1D& grid = start.grid();
  schedule.evolution.validate(grid);
  if (!start.all_finite()) throw Error(ErrorKind::NonFinite, "initial state is not finite");
  const std::size_t first = grid.nearest_index(schedule.x_A);
  const double initial_inside = inside_weight(start.data(), first, grid.dx());
  if (initial_inside > kSupportTolerance)
    throw Error(ErrorKind::SupportViolation,
                "initial weight " + std::to_string(initial_inside) + " already beyond the detector");

  const std::size_t n = grid.size();
  CVec phase(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.k(j);
    phase[j] = std::polar(1.0 / static_cast<double>(n), -k * k * schedule.delta / (2.0 * schedule.evolution.mass));
  }

  CVec v = start.data();
  for (std::size_t i = first; i < n; ++i) v[i] = {};
  const std::size_t looks = schedule.count();
  ArrivalSeries out;
  out.bin_width = schedule.delta;
  out.times.reserve(looks);
  out.probabilities.reserve(looks);
  for (std::size_t k = 1; k <= looks; ++k) {
    fft::forward(v);
    for (std::size_t j = 0; j < n; ++j) v[j] *= phase[j];
    fft::backward(v);
    out.times.push_back(schedule.delta * static_cast<double>(k));
    out.probabilities.push_back(inside_weight(v, first, grid.dx()));
    for (std::size_t i = first; i < n; ++i) v[i] = {};
  }
  double residual = 0.0;
  for (const auto& c : v) residual += std::norm(c);
  out.residual = residual * grid.dx() + initial_inside;
  return out;
}

std::vector<ZenoPoint> zeno_scan(const WaveFunction& psi0, double x_A, const std::vector<double>& deltas,
                                 double t_max, const EvolutionParams& evolution) {
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw Error(ErrorKind::InvalidArgument, "delta values must be descending");
  std::vector<ZenoPoint> out;
  for (double delta : deltas) {
    MeasurementSchedule s{x_A, delta, t_max, evolution};
    // Largest step not above the requested dt that divides delta exactly.
    s.evolution.dt = delta / std::ceil(delta / evolution.dt - 1e-9);
    const auto series = repeated_measurement_arrival(psi0, s);
    out.push_back({delta, series.detected()});
  }
  return out;
}

cplx interpolate(const WaveFunction& psi, double x) { return synthesize(to_momentum(psi), x, false); }

double probability_current(const WaveFunction& psi, double x, double mass) {
  const WaveFunction m = to_momentum(psi);
  const cplx value = synthesize(m, x, false);
  const cplx slope = synthesize(m, x, true);
  return std::imag(std::conj(value) * slope) / mass;
}

double half_line_weight(const WaveFunction& psi, double x_A) {
  const WaveFunction m = to_momentum(psi);
  const Grid1D& grid = m.grid();
  const std::size_t n = grid.size();
  const std::size_t big = 2 * n;
  // Zero-padded synthesis on a grid of spacing dx/2 makes |psi|^2 alias-free.
  CVec b(big);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t slot = j < n / 2 ? j : j + n;
    b[slot] = m[j] * std::polar(1.0, grid.k(j) * grid.x_min());
  }
  fft::backward(b);
  const double scale = grid.dk() / std::sqrt(2.0 * kPi);
  for (auto& c : b) c = std::norm(c * scale);
  fft::forward(b);
  const double length = grid.length();
  const double offset = x_A - grid.x_min();
  double total = std::real(b[0]) / static_cast<double>(big) * (length - offset);
  for (std::size_t j = 1; j < big; ++j) {
    const long long jj = static_cast<long long>(j) < static_cast<long long>(n) ? static_cast<long long>(j)
                                                                                : static_cast<long long>(j) - static_cast<long long>(big);
    const double q = 2.0 * kPi * static_cast<double>(jj) / length;
    const cplx coeff = b[j] / static_cast<double>(big);
    total += std::real(coeff * (1.0 - std::polar(1.0, q * offset)) / cplx(0.0, q));
  }
  return total;
}

double half_line_weight_rate(const WaveFunction& psi, double x_A, double mass, double h) {
  auto f = [&](double t) { return half_line_weight(free_evolve(psi, t, mass), x_A); };
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

std::vector<double> current_series(const WaveFunction& psi0, double x_A, const std::vector<double>& times,
                                   double mass) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(probability_current(free_evolve(psi0, t, mass), x_A, mass));
  return out;
}

double PresenceDistribution::mean_time() const {
  double s = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) s += times[i] * density[i] * bin_width;
  return s;
}

PresenceDistribution presence_distribution(const WaveFunction& psi0, double x_A, double t0, double t1,
                                           std::size_t n_samples, double mass) {
  if (!(t1 > t0) || n_samples < 3) throw Error(ErrorKind::InvalidArgument, "need t1 > t0 and at least 3 samples");
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  const WaveFunction m = to_momentum(psi0);
  const Grid1D& grid = m.grid();
  CVec base(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) base[j] = m[j] * std::polar(1.0, grid.k(j) * x_A);
  PresenceDistribution out;
  out.bin_width = (t1 - t0) / static_cast<double>(n_samples - 1);
  out.times.resize(n_samples);
  out.density.resize(n_samples);
  const double scale = grid.dk() / std::sqrt(2.0 * kPi);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double t = t0 + out.bin_width * static_cast<double>(s);
    cplx v{};
    for (std::size_t j = 0; j < base.size(); ++j) {
      const double k = grid.k(j);
      v += base[j] * std::polar(1.0, -k * k * t / (2.0 * mass));
    }
    out.times[s] = t;
    out.density[s] = std::norm(v * scale);
  }
  const double peak = *std::max_element(out.density.begin(), out.density.end());
  if (!(peak > 0.0)) throw Error(ErrorKind::ZeroNorm, "state never reaches the detector point");
  if (out.density.front() > kEdgeFraction * peak || out.density.back() > kEdgeFraction * peak)
    throw Error(ErrorKind::WindowTooSmall, "presence at the window edges exceeds 1e-8 of the peak");
  double total = 0.0;
  for (double d : out.density) total += d * out.bin_width;
  for (double& d : out.density) d /= total;
  return out;
}

double projector_commutator_norm(const WaveFunction& psi, double x_A, double t1, double t2, double mass) {
  auto heisenberg = [&](const WaveFunction& phi, double t) {
    return free_evolve(project_plus(free_evolve(phi, t, mass), x_A).inside, -t, mass);
  };
  const WaveFunction start = to_position(psi);
  const WaveFunction a = heisenberg(heisenberg(start, t2), t1);
  const WaveFunction b = heisenberg(heisenberg(start, t1), t2);
  return std::sqrt((a - b).norm2());
}

}  // namespace toa
