#pragma once

#include <cstddef>
#include <vector>

#include "toa/grid.hpp"
#include "toa/propagator.hpp"

namespace toa {

/// O(k): 1 for |k| >= epsilon, a C-infinity step S(|k|/epsilon) below, so it
/// vanishes faster than any power at k = 0 (in particular faster than sqrt|k|).
struct CutoffProfile {
  double epsilon = 0.1;

  void validate() const;
  double operator()(double k) const;
  std::vector<double> sample(const Grid1D& grid) const;
  /// Default cutoff k0/50 for a fixture with central wavenumber k0.
  static CutoffProfile for_wavenumber(double k0) { return {k0 / 50.0}; }
};

/// <k|T> = (theta(k) + i theta(-k)) sqrt(|k| / 2 pi m) exp(i T k^2 / 2m).
cplx toa_eigenfunction(double T, double k, double mass);
/// The same sampled on the momentum grid (momentum representation, not normalizable).
WaveFunction toa_eigenfunction(const Grid1D& grid, double T, double mass);

/// Uniform arrival-time window; n must be a power of two.
struct ToaWindow {
  double t_first = -10.0;
  double dT = 0.01;
  std::size_t n = 4096;

  void validate() const;
  /// Highest energy the window resolves, 2 pi / dT.
  double energy_cover() const;
};

struct ToaState {
  std::vector<double> times;
  std::vector<cplx> g;
  double dT = 0.0;

  double norm2() const;
  double mean_time() const;
  double peak_time() const;
};

/// g(T) = integral dk conj(<k|T>) psi~(k) on the window. Evaluated per sign
/// sector as a Fourier transform in E = k^2/2m (midpoint energy samples), so
/// sum |g|^2 dT equals the energy quadrature of |psi~|^2 exactly.
/// Throws Aliasing if more than 1e-10 of the state lies above the window's energy cover.
ToaState toa_transform(const WaveFunction& psi, double mass, const ToaWindow& window);

/// Gaussian test function exp(-(T - center)^2 / (2 width^2) + i frequency T).
struct KernelTestFunction {
  double center = 0.0;
  double width = 0.5;
  double frequency = 0.0;

  cplx operator()(double T) const;
  cplx derivative(double T) const;
};

struct KernelCheck {
  cplx smeared;      // via eigenfunctions and a momentum integral
  cplx closed_form;  // delta part plus principal-value part
  double residual = 0.0;
};

/// Smeared overlap integral conj(f(T)) g(T') <T|T'> dT dT', computed once
/// through the momentum-space eigenfunctions and once from
/// delta(T - T') - i / (pi (T - T')).
KernelCheck overlap_kernel_check(const KernelTestFunction& f, const KernelTestFunction& g, double mass);

/// T' = O(p) T O(p) on the grid with T = -m p^{-1/2} x p^{-1/2}, the branch
/// p^{-1/2} = -i |p|^{-1/2} for p < 0 making p^{-1/2} p^{-1/2} = 1/p. Realized
/// Hermitian as -(m/2)(W_s x W + W x W_s), W = O/sqrt|p|, W_s = sgn(p) W, with
/// x acting as i d/dk (multiplication by x in position space). Both sign
/// sectors then have eigenvalue T on <k|T>, and [T', H] = -i O^2.
/// Immutable once built.
class RegularizedToa {
 public:
  RegularizedToa(const Grid1D& grid, CutoffProfile cutoff, double mass);

  const Grid1D& grid() const noexcept { return grid_; }
  double mass() const noexcept { return mass_; }
  const CutoffProfile& cutoff() const noexcept { return cutoff_; }
  const std::vector<double>& profile() const noexcept { return profile_; }

  /// Momentum representation out.
  WaveFunction apply(const WaveFunction& psi) const;
  /// <psi|T'|psi> / <psi|psi>.
  double expectation(const WaveFunction& psi) const;
  /// <psi|[T', H]|psi> / <psi|psi> with H = k^2/2m.
  cplx commutator_expectation(const WaveFunction& psi) const;
  /// integral O(k)^power |psi~|^2 dk / <psi|psi>.
  double cutoff_moment(const WaveFunction& psi, int power) const;
  /// Weight of the state inside |k| < epsilon.
  double weight_below_cutoff(const WaveFunction& psi) const;

 private:
  Grid1D grid_;
  CutoffProfile cutoff_;
  double mass_;
  std::vector<double> profile_;
  std::vector<double> weight_;         // O(k) / sqrt|k|
  std::vector<double> signed_weight_;  // sgn(k) O(k) / sqrt|k|
};

struct DriftResult {
  double initial = 0.0;      // <T'> at t = 0
  double closed_form = 0.0;  // <T'>(0) + t * integral (1 - O^2) |psi~|^2
  double evolved = 0.0;      // <T'> on the freely evolved state, plus t
  double slope = 0.0;        // (evolved - initial) / t
};

/// Expected arrival time after waiting t; time zero is the preparation time.
DriftResult toa_drift(const RegularizedToa& op, const WaveFunction& psi, double t);

/// exp(-i q T') by exact eigendecomposition of the grid operator. Dense, so
/// grids are limited to 2048 points.
class ToaKick {
 public:
  explicit ToaKick(const RegularizedToa& op);

  /// Throws SupportViolation if more than 1e-6 of the state lies below the
  /// cutoff and InvalidArgument unless q > -E_min.
  WaveFunction apply(const WaveFunction& psi, double q) const;

 private:
  RegularizedToa op_;
  std::vector<double> eigenvalues_;
  std::vector<cplx> vectors_;  // column-major n x n
};

WaveFunction energy_shift_kick(const RegularizedToa& op, const WaveFunction& psi, double q);

/// Gaussian superposition of k > 0 eigenstates exp(-(T - T0)^2/(2 Delta^2)).
struct CoherentToaSpec {
  double T0 = 10.0;
  double delta = 1.0;
  double mass = 1.0;

  void validate() const;
};

/// Normalized momentum-space state. Throws Resolution when the grid cannot
/// represent energies up to ~ 1/Delta.
WaveFunction coherent_toa_state(const Grid1D& grid, const CoherentToaSpec& spec);

/// Mean kinetic energy of the continuum coherent state, 1 / (sqrt(pi) Delta).
double coherent_mean_energy(const CoherentToaSpec& spec);

struct EigenstateTriggerSetup {
  CoherentToaSpec state;
  double alpha = 20.0;
  ClockSpec clock;  // clock.accuracy is normally state.delta
  EvolutionParams evolution;
  CaptureSpec capture;
};

struct EigenstateTriggerResult {
  double detection = 0.0;
  double oracle = 0.0;        // flux average for the square the grid realizes
  double delta_oracle = 0.0;  // the same for the ideal delta coupling
  double undetected_on_grid = 0.0;
};

/// Sends the coherent TOA state through the clock-coupled trigger.
EigenstateTriggerResult eigenstate_trigger_experiment(const Grid1D& grid, const EigenstateTriggerSetup& setup);

/// Flux-averaged detection of the momentum distribution against the trigger +
/// clock; square_width > 0 selects the finite-width square coupling.
double flux_average_detection(const WaveFunction& psi, double alpha, double accuracy, double mass,
                              double square_width = 0.0);

}  // namespace toa
