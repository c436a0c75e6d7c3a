#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "toa/arrival.hpp"
#include "toa/grid.hpp"
#include "toa/propagator.hpp"

namespace toa {

/// Projective detector at x_A looked at every `delta` up to `t_max`. Free
/// evolution between looks; delta must be a positive integer multiple of the
/// propagator step dt.
struct MeasurementSchedule {
  double x_A = 0.0;
  double delta = 0.1;
  double t_max = 10.0;
  EvolutionParams evolution;

  void validate() const;
  std::size_t count() const;
};

struct ProjectedParts {
  WaveFunction inside;   // x >= x_A
  WaveFunction outside;  // x < x_A
};

/// Sharp split at the grid point nearest x_A: inside holds every sample with
/// index >= that point. Returns position-space parts.
ProjectedParts project_plus(const WaveFunction& psi, double x_A);

/// Probability of the Geiger-counter record: P(t_k) is the weight found
/// inside at look k given no earlier click. Survivor weights are carried
/// unnormalized, so sum P + residual equals the initial norm to rounding.
/// Throws SupportViolation if the initial inside weight exceeds 1e-8.
/// No guard-band check: every sharp cut spreads weight up to the lattice
/// cutoff, and that tail reaches the edges whatever the box size.
ArrivalSeries repeated_measurement_arrival(const WaveFunction& psi0, const MeasurementSchedule& schedule);

struct ZenoPoint {
  double delta = 0.0;
  double detection = 0.0;
};

/// Total detection probability for each interval; `deltas` must be strictly descending.
std::vector<ZenoPoint> zeno_scan(const WaveFunction& psi0, double x_A, const std::vector<double>& deltas,
                                 double t_max, const EvolutionParams& evolution);

/// psi(x) at an arbitrary point by direct Fourier synthesis.
cplx interpolate(const WaveFunction& psi, double x);

/// j(x) = Im(psi* dpsi/dx)/m at an arbitrary point, derivative taken spectrally.
double probability_current(const WaveFunction& psi, double x, double mass);

/// Exact integral of |psi|^2 over [x_A, x_max) for the band-limited state.
double half_line_weight(const WaveFunction& psi, double x_A);

/// d/dt of half_line_weight under free evolution (five-point stencil of step h).
double half_line_weight_rate(const WaveFunction& psi, double x_A, double mass, double h = 1e-3);

/// j(x_A, t) under free evolution at each sample time.
std::vector<double> current_series(const WaveFunction& psi0, double x_A, const std::vector<double>& times,
                                   double mass);

struct PresenceDistribution {
  std::vector<double> times;
  std::vector<double> density;  // integrates to 1 with weight bin_width
  double bin_width = 0.0;

  double mean_time() const;
};

/// |psi(x_A, t)|^2 normalized over [t0, t1] (n_samples uniform samples).
/// Throws WindowTooSmall if the edge values exceed 1e-8 of the peak.
PresenceDistribution presence_distribution(const WaveFunction& psi0, double x_A, double t0, double t1,
                                           std::size_t n_samples, double mass);

/// || [Pi_+(t1), Pi_+(t2)] psi || with Heisenberg-picture projectors under free evolution.
double projector_commutator_norm(const WaveFunction& psi, double x_A, double t1, double t2, double mass);

}  // namespace toa
