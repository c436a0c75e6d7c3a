#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace toa {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;

/// Uniform periodic grid on [x_min, x_max) with n points (n a power of two,
/// n >= 16). The conjugate momentum grid has spacing 2*pi/(n*dx) and covers
/// [-pi/dx, pi/dx); momentum samples are stored in FFT index order.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  double dk() const noexcept { return dk_; }
  double length() const noexcept { return x_max_ - x_min_; }
  double k_max() const noexcept { return kPi / dx_; }
  /// Largest kinetic energy representable on the grid for mass m.
  double e_max(double mass) const noexcept { return k_max() * k_max() / (2.0 * mass); }

  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }
  double k(std::size_t j) const noexcept {
    const auto jj = static_cast<long long>(j);
    const auto nn = static_cast<long long>(n_);
    return dk_ * static_cast<double>(jj < nn / 2 ? jj : jj - nn);
  }
  /// Index of the grid point nearest to position `pos` (clamped to the grid).
  std::size_t nearest_index(double pos) const noexcept;

  std::vector<double> positions() const;
  std::vector<double> wavenumbers() const;

  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
  double dk_;
};

enum class Representation { Position, Momentum };

/// Complex amplitudes on a grid. In the momentum representation the samples
/// are continuous Fourier amplitudes psi~(k) = (2 pi)^(-1/2) int psi(x) e^(-ikx) dx,
/// so sum |psi~|^2 dk equals sum |psi|^2 dx.
class WaveFunction {
 public:
  WaveFunction(Grid1D grid, CVec values, Representation rep = Representation::Position);
  WaveFunction(Grid1D grid, Representation rep = Representation::Position);

  const Grid1D& grid() const noexcept { return grid_; }
  Representation representation() const noexcept { return rep_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  const CVec& data() const noexcept { return values_; }
  CVec& data() noexcept { return values_; }
  cplx operator[](std::size_t i) const noexcept { return values_[i]; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Integration weight of one sample: dx or dk.
  double measure() const noexcept;
  double norm2() const noexcept;
  bool all_finite() const noexcept;

  WaveFunction& operator+=(const WaveFunction& other);
  WaveFunction& operator-=(const WaveFunction& other);
  WaveFunction& operator*=(cplx s);

 private:
  Grid1D grid_;
  CVec values_;
  Representation rep_;
};

WaveFunction operator+(WaveFunction a, const WaveFunction& b);
WaveFunction operator-(WaveFunction a, const WaveFunction& b);
WaveFunction operator*(cplx s, WaveFunction a);

/// <a|b> with the representation's measure. Both must share grid and representation.
cplx inner(const WaveFunction& a, const WaveFunction& b);

/// Two-component (trigger spin) wavefunction on a shared grid.
struct SpinorWave {
  WaveFunction up;
  WaveFunction down;

  SpinorWave(WaveFunction up_, WaveFunction down_);
  /// Spin-up state with an empty down component.
  static SpinorWave spin_up(WaveFunction psi);

  const Grid1D& grid() const noexcept { return up.grid(); }
  double norm2() const noexcept { return up.norm2() + down.norm2(); }
};

struct GaussianSpec {
  double x0 = 0.0;
  double k0 = 0.0;
  double sigma = 1.0;
  double mass = 1.0;
};

/// Normalized packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x). Throws GridTooSmall
/// when the packet center is within 6 sigma of either grid edge.
WaveFunction make_gaussian(const Grid1D& grid, const GaussianSpec& spec);

/// Continuous Fourier amplitude of the make_gaussian packet at wavenumber k
/// (exact, no grid involved).
cplx gaussian_amplitude(const GaussianSpec& spec, double k);

/// Unitary change of representation (no-op when already in `target`).
WaveFunction transform(const WaveFunction& psi, Representation target);
WaveFunction to_momentum(const WaveFunction& psi);
WaveFunction to_position(const WaveFunction& psi);

enum class Observable { Position, Wavenumber, KineticEnergy };

/// Normalized expectation value; kinetic energy is k^2/(2m) evaluated in momentum space.
double expectation(const WaveFunction& psi, Observable obs, double mass = 1.0);

/// Continuous Fourier amplitude at an arbitrary wavenumber (direct sum; O(n)).
cplx fourier_amplitude(const WaveFunction& position_psi, double k);

/// Spectral derivative d/dx of a position-space function.
WaveFunction spectral_derivative(const WaveFunction& position_psi);

}  // namespace toa
