#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "toa/arrival.hpp"
#include "toa/grid.hpp"

namespace toa {

/// Hermitian 2x2 matrix in the sigma_z basis (index 0 = up, 1 = down).
struct SpinMatrix {
  double uu = 0.0;
  cplx ud{};
  double dd = 0.0;

  cplx du() const noexcept { return std::conj(ud); }

  static SpinMatrix identity() { return {1.0, {}, 1.0}; }
  static SpinMatrix sigma_x() { return {0.0, 1.0, 0.0}; }
  static SpinMatrix sigma_z() { return {1.0, {}, -1.0}; }
  /// (1 + sigma_x)/2, projector onto |up_x>.
  static SpinMatrix up_x_projector() { return {0.5, 0.5, 0.5}; }
  static SpinMatrix diag(double up, double down) { return {up, {}, down}; }

  friend SpinMatrix operator+(SpinMatrix a, const SpinMatrix& b) {
    return {a.uu + b.uu, a.ud + b.ud, a.dd + b.dd};
  }
  friend SpinMatrix operator*(double s, SpinMatrix a) { return {s * a.uu, s * a.ud, s * a.dd}; }
};

struct TriggerClockParams {
  double mass = 1.0;
  double alpha = 1.0;
  double kinetic_energy = 1.0;  // E_k of the incident up-channel wave
  double clock_momentum = 0.0;  // P_y eigenvalue p

  void validate() const;
};

/// Channel wavenumbers; a closed channel carries i*kappa (Im >= 0).
struct ChannelWavevectors {
  cplx up{};
  cplx down{};
};

/// Amplitudes for a unit plane wave incident from the left in the up channel.
/// Left side: e^{ik_up x} + phi_L_up e^{-ik_up x}, phi_L_down e^{-ik_down x};
/// right side: phi_R_up e^{ik_up x}, phi_R_down e^{ik_down x}.
struct ScatterAmplitudes {
  cplx phi_R_up{};
  cplx phi_R_down{};
  cplx phi_L_up{};
  cplx phi_L_down{};
  ChannelWavevectors k;

  /// Outgoing flux divided by incident flux; 1 for a unitary solution.
  double flux_ratio() const;
};

/// Probability that at least one of n triggers flips, 1 - 2^-n.
double trigger_flip_probability(int n_spins);

ChannelWavevectors clock_wavevectors(double mass, double kinetic_energy, double clock_momentum);

/// Exact amplitudes for the delta-coupled trigger + clock Hamiltonian
/// P^2/2m + (alpha/2)(1+sigma_x)delta(x) + (1/2)(1+sigma_z)p.
/// Sign convention: for alpha -> infinity phi_R_up > 0 and phi_R_down < 0.
ScatterAmplitudes clock_scatter(const TriggerClockParams& params);

/// Same as clock_scatter but also accepts p < 0, including p < -E_k where the
/// down channel is closed (its wavevector is then i*kappa).
ScatterAmplitudes clock_scatter_general(const TriggerClockParams& params);

/// alpha -> infinity limit: |phi_R_down| = |phi_R_up| = k_up/(k_up + k_down).
/// Any p with an open down channel (E_k + p > 0).
ScatterAmplitudes clock_scatter_limit(double kinetic_energy, double clock_momentum, double mass);

/// Flux-weighted spin-flip probability (k_down/k_up)(|phi_R_down|^2 + |phi_L_down|^2);
/// zero when the down channel is closed.
double detection_probability(const ScatterAmplitudes& amps);

/// Closed form 2 k_up k_down / (k_up + k_down)^2 of the alpha -> infinity detection probability.
double detection_probability_limit(double kinetic_energy, double clock_momentum, double mass);

/// Detection averaged over a Gaussian clock of the given accuracy,
/// |chi~(p)|^2 = (accuracy/sqrt(pi)) exp(-p^2 accuracy^2). An infinite alpha
/// selects the alpha -> infinity amplitudes; a positive square_width replaces
/// the delta by the area-preserving square of clock_scatter_square.
double clock_detection_average(double kinetic_energy, double accuracy, double mass, double alpha,
                               double square_width = 0.0);

/// Pointer readout of the trigger + clock built from stationary amplitudes
/// instead of a wavepacket run. For outgoing down-channel wavenumber q the
/// clock slices combine as sum_p chi~(p) e^{ipt} phi_down(k(p), p) psi~(k(p)) q/k(p)
/// with k(p)^2 = q^2 - 2mp, and the arrival density is the q-integral of the
/// squared magnitude (transmitted and reflected sides added).
struct StationaryReadoutSpec {
  double accuracy = 1.0;
  double mass = 1.0;
  double alpha = std::numeric_limits<double>::infinity();
  double y0 = 0.0;
  /// Minimum length of the reported time axis (one pointer period).
  double period = 64.0;
  /// Largest outgoing wavenumber integrated; 0 selects one from the clock extent.
  double wavenumber_max = 0.0;
  std::size_t wavenumber_points = 2048;

  void validate() const;
};

/// `incident` is the continuous momentum amplitude of a right-moving packet
/// that starts left of the trigger. Probabilities are unconditional; the
/// residual is the undetected probability.
ArrivalSeries stationary_clock_readout(const std::function<cplx(double)>& incident, double incident_k_max,
                                       const StationaryReadoutSpec& spec);

struct BoosterParams {
  double mass = 1.0;
  double alpha = 1.0;
  double W = 1.0;
  double V1 = 1.0;
  double V2 = 1.0;
  double energy = 0.5;

  void validate() const;
};

/// Booster amplitudes referenced to x = 0. The up channel propagates on the
/// left and decays on the right; the down channel decays on the left and
/// propagates on the right. Decaying wavevectors are stored as i*kappa.
struct BoosterAmplitudes {
  cplx phi_R_up{};
  cplx phi_R_down{};
  cplx phi_L_up{};
  cplx phi_L_down{};
  cplx k_up_left{};
  cplx k_up_right{};
  cplx k_down_left{};
  cplx k_down_right{};

  double reflected_up() const;
  double transmitted_down() const;
  double flux_ratio() const { return reflected_up() + transmitted_down(); }
};

/// Incident up-channel wave on H = P^2/2m + alpha sigma_x delta(x) + (W/2)theta(x)(1+sigma_z)
/// + (1/2)[V1 theta(-x) - V2 theta(x)](1-sigma_z), with 0 < E < W and E < V1.
BoosterAmplitudes booster_scatter(const BoosterParams& params);

// ---------------------------------------------------------------------------
// General piecewise-constant two-channel scattering (transfer matrices).

/// Regions separated by strictly increasing `boundaries`; `regions` has one more
/// entry than `boundaries`. The two outermost matrices must be diagonal.
/// Delta terms add a derivative jump 2m * strength * matrix * psi at `position`.
struct ChannelDelta {
  double position = 0.0;
  SpinMatrix matrix;
  double strength = 0.0;
};

struct PiecewiseChannels {
  std::vector<double> boundaries;
  std::vector<SpinMatrix> regions;
  std::vector<ChannelDelta> deltas;

  void validate() const;
};

/// Amplitudes referenced to x = 0 for a unit wave incident from the left in
/// `incident_channel` (0 = up, 1 = down). Left/right wavevectors per channel are
/// sqrt(2m(E - V)) with Im >= 0.
struct ChannelScattering {
  std::array<cplx, 2> reflected{};
  std::array<cplx, 2> transmitted{};
  std::array<cplx, 2> k_left{};
  std::array<cplx, 2> k_right{};
  int incident_channel = 0;

  double flux_ratio() const;
};

ChannelScattering scatter_piecewise(const PiecewiseChannels& potential, double energy, double mass,
                                    int incident_channel = 0);

/// Clock model with the delta replaced by an area-preserving square of the
/// given width centred on x = 0 (height alpha/width on the (1+sigma_x)/2 projector).
ScatterAmplitudes clock_scatter_square(const TriggerClockParams& params, double width);

}  // namespace toa
