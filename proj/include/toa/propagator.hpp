#pragma once

#include <array>
#include <functional>
#include <vector>

#include "toa/arrival.hpp"
#include "toa/grid.hpp"
#include "toa/scattering.hpp"

namespace toa {

/// Piecewise-constant 2x2 spin potential plus delta couplings. On a grid each
/// delta becomes an area-preserving square of width max(1/alpha, 4 dx),
/// rounded up to an odd number of cells and centred on the nearest grid point.
struct PotentialSpec {
  std::vector<double> boundaries;
  std::vector<SpinMatrix> regions{SpinMatrix{}};
  std::vector<ChannelDelta> deltas;

  void validate() const;
  const SpinMatrix& region_at(double x) const;
  /// Realized square width of a delta of the given strength.
  double delta_width(const Grid1D& grid, double strength) const;
  /// Per-point potential matrices on the grid.
  std::vector<SpinMatrix> sample(const Grid1D& grid) const;
  /// The grid potential as cell-constant regions, for exact stationary scattering.
  PiecewiseChannels realized(const Grid1D& grid) const;
  /// The potential the spectral grid actually acts with on band-limited states:
  /// the periodic trigonometric interpolant of the samples, resolved into
  /// `subdivisions` constant pieces per cell within `half_window` cells of
  /// every feature. Stationary scattering of this matches wavepacket runs far
  /// better than the cell-constant picture.
  PiecewiseChannels band_limited(const Grid1D& grid, std::size_t subdivisions = 8,
                                 std::size_t half_window = 128) const;
  /// Potential of each channel far to the left (side 0) and right (side 1).
  std::array<std::array<double, 2>, 2> asymptotic() const;

  /// (alpha/2)(1+sigma_x) delta(x) at x = 0.
  static PotentialSpec trigger(double alpha);
  /// Trigger plus the clock-slice offset p on the up channel.
  static PotentialSpec trigger_clock(double alpha, double clock_momentum);
  static PotentialSpec booster(const BoosterParams& params);
};

struct EvolutionParams {
  double dt = 1e-3;
  std::size_t n_steps = 0;
  double mass = 1.0;

  double duration() const { return dt * static_cast<double>(n_steps); }
  /// Requires dt > 0 and dt * E_max < 0.5 on the grid.
  void validate(const Grid1D& grid) const;
};

/// Outgoing waves that reach |x - center| > inner_radius are moved off the grid
/// into momentum-space buffers (interaction picture with respect to the
/// asymptotic channel potential on that side), so they cannot wrap around.
/// Removal is gradual: every interval a fraction 1 - exp(-rate s(r) tau) is
/// moved, with s ramping smoothly from 0 to 1 over ramp_width. A gentle ramp
/// keeps the reflection off the absorber negligible; the rate must stay well
/// below k^2/m of the slowest outgoing wave. Only outgoing momenta are
/// moved (k > 0 on the right, k < 0 on the left), faded in smoothly over
/// 0 < |k| < min_wavenumber so the removed piece stays localized.
/// Probe wavenumbers are accumulated exactly by direct Fourier sums.
struct CaptureSpec {
  double center = 0.0;
  double inner_radius = 0.0;
  double ramp_width = 8.0;
  double rate = 10.0;
  double min_wavenumber = 0.5;
  /// Capture on the left (x < center) and right sides.
  std::array<bool, 2> sides{true, true};
  std::size_t interval_steps = 4;
  std::vector<double> probes;
  bool enabled() const { return inner_radius > 0.0; }
};

/// Momentum amplitudes G(k) = psi~(k, t) exp(i (k^2/2m + V) t) for [side][channel].
struct OutgoingWaves {
  std::array<std::array<CVec, 2>, 2> spectrum;
  std::array<std::array<CVec, 2>, 2> probe_values;
  std::vector<double> probes;
  std::array<std::array<double, 2>, 2> potential{};
};

/// Fraction of the domain at each edge treated as guard band.
inline constexpr double kGuardFraction = 1.0 / 32.0;
inline constexpr double kWrapTolerance = 1e-6;

struct SpinorRun {
  SpinorWave psi;          // on-grid remainder at the final time
  OutgoingWaves captured;  // waves moved off the grid (empty when capture disabled)
  double time = 0.0;
  double mass = 1.0;

  double norm2() const;
  /// Total down-channel probability, on grid plus captured.
  double down_probability() const;
  /// Outgoing amplitudes including the on-grid remainder, split at the capture center.
  OutgoingWaves outgoing(const PotentialSpec& potential, double split = 0.0) const;
};

/// Exact free evolution exp(-i k^2 t / 2m); keeps the input representation.
WaveFunction free_evolve(const WaveFunction& psi, double time, double mass);

/// Second-order split-step evolution (half kinetic, exact 2x2 potential
/// exponential per point, half kinetic). Throws StabilityViolation, WrapAround.
SpinorWave evolve_spinor(const SpinorWave& psi, const PotentialSpec& potential, const EvolutionParams& params);

SpinorRun evolve_spinor_captured(const SpinorWave& psi, const PotentialSpec& potential,
                                 const EvolutionParams& params, const CaptureSpec& capture);

/// Probe wavenumbers needed to resolve clock amplitudes at incident k values.
std::vector<double> clock_probe_wavenumbers(const std::vector<double>& incident_k, double clock_momentum,
                                            double mass);

/// Momentum-resolved clock amplitudes at incident wavenumber k (must have been
/// probed), normalized by the initial packet amplitude.
ScatterAmplitudes resolve_clock_amplitudes(const OutgoingWaves& out, const WaveFunction& initial_up,
                                           double k, double clock_momentum, double mass);

std::vector<double> booster_probe_wavenumbers(const std::vector<double>& incident_k, const BoosterParams& params);
BoosterAmplitudes resolve_booster_amplitudes(const OutgoingWaves& out, const WaveFunction& initial_up, double k,
                                             const BoosterParams& params);

// ---------------------------------------------------------------------------
// Clock coupling.

/// Clock pointer prepared as chi(y) ~ exp(-(y - y0)^2 / (2 accuracy^2)), so the
/// momentum amplitude has width 1/accuracy. Slices sample P_y uniformly on
/// [-p_extent, p_extent] with p_extent >= 6/accuracy.
struct ClockSpec {
  double accuracy = 1.0;
  double y0 = 0.0;
  std::size_t n_slices = 64;
  double p_extent = 0.0;  // 0 selects 6/accuracy

  void validate() const;
  double extent() const { return p_extent > 0.0 ? p_extent : 6.0 / accuracy; }
  std::vector<double> momenta() const;
  double spacing() const;
  /// chi~(p) * sqrt(dp) for each slice; squared magnitudes sum to ~1.
  std::vector<cplx> weights() const;
};

struct ClockJointState {
  ClockSpec clock;
  std::vector<double> momenta;
  std::vector<cplx> weights;
  std::vector<SpinorRun> slices;
  double elapsed = 0.0;

  double detection_probability() const;
  double total_norm2() const;
};

/// Evolves the particle + trigger + clock by decomposition over clock momentum:
/// each slice is the trigger problem with the up channel raised by p.
ClockJointState evolve_with_clock(const SpinorWave& psi, const ClockSpec& clock, double alpha,
                                  const EvolutionParams& params, const CaptureSpec& capture);

struct ReadoutOptions {
  double interaction_radius = 1.0;
  double premature_tolerance = 1e-4;
};

/// Marginal of the clock pointer on the down (detected) component, reported
/// against arrival time t = y - y0. Probabilities are unconditional; the
/// residual is the non-detection probability.
ArrivalSeries clock_readout(const ClockJointState& state, const ReadoutOptions& options = {});

// ---------------------------------------------------------------------------
// Cascade detector H = P^2/2m + V(x) P_y.

struct CascadeParams {
  double x_a = 0.1;
  /// Replace the slope by V = -1 everywhere.
  bool uniform = false;
  /// Readout keeps only the part of the state with x >= threshold.
  double readout_threshold = 0.0;

  double profile(double x) const;
};

struct CascadeState {
  ClockSpec clock;
  std::vector<double> momenta;
  std::vector<cplx> weights;
  std::vector<WaveFunction> slices;
  CascadeParams params;
  double elapsed = 0.0;
};

CascadeState cascade_evolve(const WaveFunction& psi, const ClockSpec& clock, const CascadeParams& params,
                            const EvolutionParams& evolution);

/// Pointer marginal on the region x >= readout_threshold, reported against the
/// inferred arrival time t = elapsed - (y0 - y); the pointer runs backwards at
/// unit rate once the particle is in the V = -1 region.
ArrivalSeries cascade_readout(const CascadeState& state);

}  // namespace toa
