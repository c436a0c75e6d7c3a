#include "toa/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "toa/error.hpp"
#include "toa/fft.hpp"

namespace toa {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_compatible(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid() == b.grid()) || a.representation() != b.representation())
    throw Error(ErrorKind::InvalidArgument, "wavefunctions live on different grids or representations");
}

}  // namespace

Grid1D::Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
  if (n < 16 || !is_power_of_two(n))
    throw Error(ErrorKind::InvalidArgument, "grid size must be a power of two >= 16");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw Error(ErrorKind::InvalidArgument, "grid requires finite x_min < x_max");
  dx_ = (x_max - x_min) / static_cast<double>(n);
  dk_ = 2.0 * kPi / (static_cast<double>(n) * dx_);
}

std::size_t Grid1D::nearest_index(double pos) const noexcept {
  const double f = std::round((pos - x_min_) / dx_);
  if (f <= 0.0) return 0;
  if (f >= static_cast<double>(n_ - 1)) return n_ - 1;
  return static_cast<std::size_t>(f);
}

std::vector<double> Grid1D::positions() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
  return out;
}

std::vector<double> Grid1D::wavenumbers() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = k(j);
  return out;
}

WaveFunction::WaveFunction(Grid1D grid, CVec values, Representation rep)
    : grid_(grid), values_(std::move(values)), rep_(rep) {
  if (values_.size() != grid_.size())
    throw Error(ErrorKind::InvalidArgument, "value count does not match grid size");
}

WaveFunction::WaveFunction(Grid1D grid, Representation rep)
    : grid_(grid), values_(grid.size(), cplx{}), rep_(rep) {}

double WaveFunction::measure() const noexcept {
  return rep_ == Representation::Position ? grid_.dx() : grid_.dk();
}

double WaveFunction::norm2() const noexcept {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return s * measure();
}

bool WaveFunction::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

WaveFunction& WaveFunction::operator+=(const WaveFunction& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

WaveFunction& WaveFunction::operator-=(const WaveFunction& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

WaveFunction& WaveFunction::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

WaveFunction operator+(WaveFunction a, const WaveFunction& b) { return a += b; }
WaveFunction operator-(WaveFunction a, const WaveFunction& b) { return a -= b; }
WaveFunction operator*(cplx s, WaveFunction a) { return a *= s; }

cplx inner(const WaveFunction& a, const WaveFunction& b) {
  require_compatible(a, b);
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * a.measure();
}

SpinorWave::SpinorWave(WaveFunction up_, WaveFunction down_) : up(std::move(up_)), down(std::move(down_)) {
  if (!(up.grid() == down.grid()) || up.representation() != down.representation())
    throw Error(ErrorKind::InvalidArgument, "spinor components must share grid and representation");
}

SpinorWave SpinorWave::spin_up(WaveFunction psi) {
  WaveFunction empty(psi.grid(), psi.representation());
  return SpinorWave(std::move(psi), std::move(empty));
}

WaveFunction make_gaussian(const Grid1D& grid, const GaussianSpec& spec) {
  if (!(spec.sigma > 0.0) || !(spec.mass > 0.0))
    throw Error(ErrorKind::InvalidArgument, "gaussian requires sigma > 0 and mass > 0");
  const double guard = 6.0 * spec.sigma;
  if (!(spec.x0 - grid.x_min() > guard && grid.x_max() - spec.x0 > guard))
    throw Error(ErrorKind::GridTooSmall, "packet support (6 sigma) does not fit inside the grid");
  WaveFunction psi(grid);
  const double inv4s2 = 1.0 / (4.0 * spec.sigma * spec.sigma);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = grid.x(i) - spec.x0;
    psi[i] = std::exp(cplx(-u * u * inv4s2, spec.k0 * grid.x(i)));
  }
  psi *= 1.0 / std::sqrt(psi.norm2());
  return psi;
}

cplx gaussian_amplitude(const GaussianSpec& spec, double k) {
  const double s2 = spec.sigma * spec.sigma;
  const double d = k - spec.k0;
  return std::pow(2.0 * s2 / kPi, 0.25) * std::exp(-s2 * d * d) * std::polar(1.0, -d * spec.x0);
}

WaveFunction to_momentum(const WaveFunction& psi) {
  if (psi.representation() == Representation::Momentum) return psi;
  if (!psi.all_finite()) throw Error(ErrorKind::NonFinite, "transform of non-finite wavefunction");
  const Grid1D& g = psi.grid();
  CVec data = psi.data();
  fft::forward(data);
  const double scale = g.dx() / std::sqrt(2.0 * kPi);
  for (std::size_t j = 0; j < data.size(); ++j)
    data[j] *= scale * std::polar(1.0, -g.k(j) * g.x_min());
  return WaveFunction(g, std::move(data), Representation::Momentum);
}

WaveFunction to_position(const WaveFunction& psi) {
  if (psi.representation() == Representation::Position) return psi;
  if (!psi.all_finite()) throw Error(ErrorKind::NonFinite, "transform of non-finite wavefunction");
  const Grid1D& g = psi.grid();
  CVec data = psi.data();
  const double scale = g.dk() / std::sqrt(2.0 * kPi);
  for (std::size_t j = 0; j < data.size(); ++j)
    data[j] *= scale * std::polar(1.0, g.k(j) * g.x_min());
  fft::backward(data);
  return WaveFunction(g, std::move(data), Representation::Position);
}

WaveFunction transform(const WaveFunction& psi, Representation target) {
  return target == Representation::Momentum ? to_momentum(psi) : to_position(psi);
}

double expectation(const WaveFunction& psi, Observable obs, double mass) {
  const double n2 = psi.norm2();
  if (!(n2 > 0.0)) throw Error(ErrorKind::ZeroNorm, "expectation of a zero-norm state");
  const Grid1D& g = psi.grid();
  if (obs == Observable::Position) {
    const WaveFunction p = to_position(psi);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.x(i) * std::norm(p[i]);
    return s * g.dx() / n2;
  }
  const WaveFunction q = to_momentum(psi);
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double k = g.k(j);
    s += (obs == Observable::Wavenumber ? k : k * k / (2.0 * mass)) * std::norm(q[j]);
  }
  return s * g.dk() / n2;
}

cplx fourier_amplitude(const WaveFunction& position_psi, double k) {
  const Grid1D& g = position_psi.grid();
  cplx s{};
  for (std::size_t i = 0; i < g.size(); ++i) s += position_psi[i] * std::polar(1.0, -k * g.x(i));
  return s * (g.dx() / std::sqrt(2.0 * kPi));
}

WaveFunction spectral_derivative(const WaveFunction& position_psi) {
  WaveFunction q = to_momentum(position_psi);
  const Grid1D& g = q.grid();
  for (std::size_t j = 0; j < g.size(); ++j) {
    // The Nyquist mode has no consistent derivative on a periodic grid.
    q[j] *= (j == g.size() / 2) ? cplx{} : cplx(0.0, g.k(j));
  }
  return to_position(q);
}

}  // namespace toa
