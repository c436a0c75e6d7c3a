#include <algorithm>

#include "experiments.hpp"

namespace toa::cli {
namespace {

Json grid(double x_min, double x_max, unsigned n) { return {{"x_min", x_min}, {"x_max", x_max}, {"n", n}}; }

Json packet(double x0, double k0, double sigma) { return {{"x0", x0}, {"k0", k0}, {"sigma", sigma}}; }

Json evolution(double courant, double duration) { return {{"courant", courant}, {"duration", duration}}; }

Json capture(double inner, double ramp, double rate, double min_k) {
  return {{"inner_radius", inner}, {"ramp_width", ramp}, {"rate", rate}, {"min_wavenumber", min_k}};
}

std::vector<Experiment> build() {
  std::vector<Experiment> v;

  v.push_back({"trigger-flip", "Single trigger spin flips with probability 1/2 in the hard-delta limit",
               "trigger detector",
               {{"mass", 1.0},
                {"grid", grid(-40.0, 40.0, 512)},
                {"packet", packet(-15.0, 5.0, 1.0)},
                {"model", {{"alpha", 1000.0}}},
                {"evolution", evolution(0.4, 14.0)},
                {"capture", capture(20.0, 8.0, 10.0, 0.5)},
                {"tolerance", 0.02}},
               run_trigger_flip});

  v.push_back({"multi-trigger", "N trigger spins: detection probability 1 - 2^-N", "trigger detector",
               {{"mass", 1.0}, {"kinetic_energy", 12.5}, {"spin_counts", {1, 2, 3, 4, 5, 6}}},
               run_multi_trigger});

  v.push_back(
      {"clock-accuracy-scan",
       "Trigger + clock: matching formula, hard-delta limit law, accuracy scan, wavepacket cross-check", "clocked trigger",
       {{"mass", 1.0},
        {"matching",
         {{"draws", 200u},
          {"alpha_min", 0.05},
          {"alpha_max", 500.0},
          {"energy_min", 0.05},
          {"energy_max", 50.0},
          {"clock_momentum_max", 40.0},
          {"amplitude_tolerance", 1e-6},
          {"flux_tolerance", 1e-9}}},
        {"limit_law",
         {{"kinetic_energy", 1.0},
          {"clock_momenta", {0.25, 1.0, 4.0, 16.0}},
          {"alpha_start", 2000.0},
          {"tolerance", 1e-4},
          {"slope_ratio_min", 1e4},
          {"slope_ratio_max", 1e6},
          {"slope_points", 9u},
          {"slope_tolerance", 0.03}}},
        {"accuracy_scan",
         {{"kinetic_energy", 12.5},
          {"products", {10.0, 3.0, 1.0, 0.3, 0.1, 0.03, 0.01}},
          {"high_threshold", 0.4},
          {"low_threshold", 0.1}}},
        {"cross_validation",
         {{"grid", grid(-40.0, 40.0, 512)},
          {"packet", packet(-12.0, 5.0, 1.5)},
          {"alpha", 2.0},
          {"clock_momentum", 3.0},
          {"evolution", evolution(0.4, 14.0)},
          {"capture", capture(20.0, 8.0, 10.0, 0.5)},
          {"probe_wavenumbers", {4.5, 5.0, 5.5}},
          {"band_half_window", 128u},
          {"tolerance", 1e-3}}}},
       run_clock_accuracy_scan});

  v.push_back({"two-gaussian", "Fine clock suppresses the slow component of a two-Gaussian packet", "clocked trigger",
               {{"mass", 1.0},
                {"packets", {{"x0", -12.0}, {"sigma", 2.0}, {"k1", 1.0}, {"k2", 4.0}}},
                {"coarse_accuracy", 4.0},
                {"fine_accuracy", 0.14},
                {"split_time", 7.5},
                {"suppression_factor", 2.0},
                {"readout", {{"period", 64.0}, {"wavenumber_max", 8.0}, {"wavenumber_points", 2048u}}},
                {"wavepacket_check",
                 {{"enabled", true},
                  {"grid", grid(-40.0, 40.0, 512)},
                  {"alpha", 1000.0},
                  {"slices", 24u},
                  {"evolution", evolution(0.4, 24.0)},
                  {"capture", capture(14.0, 12.0, 2.0, 0.8)},
                  {"premature_tolerance", 1.0},
                  {"tolerance", 0.03}}}},
               run_two_gaussian});

  v.push_back({"zero-current", "Windowed standing wave with zero current at the detector", "zero-current states",
               {{"mass", 1.0},
                {"grid", grid(-40.0, 40.0, 1024)},
                {"wavenumber", 5.0},
                {"window_width", 4.0},
                {"alpha", 20.0},
                {"evolution", evolution(0.4, 1.0)},
                {"current_tolerance", 1e-8},
                {"flip_tolerance", 1e-4}},
               run_zero_current});

  v.push_back({"zeno-scan", "Repeated projective measurements: detection vanishes as the interval shrinks", "repeated measurement",
               {{"mass", 1.0},
                {"grid", grid(-40.0, 40.0, 1024)},
                {"packet", packet(-15.0, 5.0, 1.0)},
                {"detector_x", 0.0},
                {"deltas", {2.0, 1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4}},
                {"t_max", 6.0},
                {"dt", 5e-4},
                {"monotone_tail", 5u},
                {"threshold", 0.05}},
               run_zeno_scan});

  v.push_back({"current-vs-arrival", "Probability current at the detector and the continuity equation", "repeated measurement",
               {{"mass", 1.0},
                {"grid", grid(-40.0, 40.0, 1024)},
                {"packets", {packet(-10.0, 5.0, 1.0), packet(-6.0, 2.0, 1.5), packet(-4.0, 0.5, 2.0)}},
                {"detector_x", 0.0},
                {"continuity_times", {0.5, 1.0, 1.5, 2.0, 2.5}},
                {"tolerance", 1e-6},
                {"t_end", 6.0},
                {"samples", 301u},
                {"commutator_t1", 1.5},
                {"commutator_t2", 2.5},
                {"commutator_threshold", 1e-3}},
               run_current_vs_arrival});

  v.push_back({"presence-vs-arrival", "Normalized presence density is not the measured arrival distribution", "repeated measurement",
               {{"mass", 1.0},
                {"grid", grid(-160.0, 160.0, 4096)},
                {"packets", {{"x0", -15.0}, {"sigma", 2.0}, {"k1", 2.0}, {"k2", 4.0}}},
                {"detector_x", 0.0},
                {"t_start", 0.0},
                {"t_end", 40.0},
                {"delta", 0.05},
                {"dt", 5e-4},
                {"min_deviation", 0.05}},
               run_presence_vs_arrival});

  v.push_back({"cascade", "Cascade detector: clock driven by the potential slope", "cascade and booster detectors",
               {{"mass", 1.0},
                {"grid", grid(-40.0, 40.0, 512)},
                {"packet", packet(-15.0, 5.0, 1.0)},
                {"x_a", 0.1},
                {"clock", {{"accuracy", 2.0}, {"slices", 32u}}},
                {"evolution", evolution(0.4, 6.0)},
                {"uniform_tolerance", 1e-9}},
               run_cascade});

  v.push_back({"booster", "Booster model: flux bookkeeping and wavepacket cross-check", "cascade and booster detectors",
               {{"mass", 1.0},
                {"model", {{"alpha", 2.0}, {"W", 10.0}, {"V1", 10.0}, {"V2", 10.0}}},
                {"energies", {0.5, 1.0, 2.0, 4.5, 6.0, 8.0, 9.5}},
                {"cross_validation",
                 {{"grid", grid(-40.0, 40.0, 1024)},
                  {"packet", packet(-10.0, 3.0, 1.5)},
                  {"evolution", evolution(0.4, 20.0)},
                  {"capture", capture(20.0, 8.0, 10.0, 1.0)},
                  {"probe_wavenumbers", {2.8, 3.0, 3.2}},
                  {"band_half_window", 40u},
                  {"tolerance", 1e-3}}}},
               run_booster});

  v.push_back({"toa-spectrum", "Time-of-arrival eigenfunctions: completeness and arrival distribution", "arrival-time operator",
               {{"mass", 1.0},
                {"grid", grid(-100.0, 100.0, 2048)},
                {"packet", packet(-10.0, 5.0, 1.0)},
                {"window", {{"t_first", -20.0}, {"dT", 0.01}, {"n", 8192u}}},
                {"eigen_time", 2.0},
                {"eigen_energy_width", 0.5},
                {"tolerance", 1e-6}},
               run_toa_spectrum});

  v.push_back({"toa-drift", "Regularized arrival-time operator: commutator, drift and energy-shift kick", "arrival-time operator",
               {{"mass", 1.0},
                {"grid", grid(-400.0, 400.0, 8192)},
                {"epsilon", 0.1},
                {"random_states",
                 {{"count", 100u},
                  {"x0_range", {-5.0, 5.0}},
                  {"k0_range", {-2.0, 6.0}},
                  {"sigma_range", {0.75, 2.0}}}},
                {"drift_time", 1.0},
                {"tolerance", 1e-6},
                {"slope_tolerance", 1e-3},
                {"kick",
                 {{"grid", grid(-100.0, 100.0, 1024)},
                  {"epsilon", 0.1},
                  {"energy_min", 5.0},
                  {"energy_max", 15.0},
                  {"arrival_phase", 4.0},
                  {"shifts", {0.5, 2.0, 10.0}},
                  {"tolerance", 0.01}}}},
               run_toa_drift});

  v.push_back({"toa-kernel", "Overlap kernel of arrival-time eigenstates", "arrival-time operator",
               {{"mass", 1.0},
                {"configurations",
                 {{{"f", {{"center", 0.0}, {"width", 0.5}, {"frequency", 0.0}}},
                   {"g", {{"center", 0.0}, {"width", 0.5}, {"frequency", 0.0}}}},
                  {{"f", {{"center", 0.0}, {"width", 0.3}, {"frequency", 0.0}}},
                   {"g", {{"center", 3.0}, {"width", 0.3}, {"frequency", 0.0}}}},
                  {{"f", {{"center", 0.0}, {"width", 0.5}, {"frequency", 0.0}}},
                   {"g", {{"center", 0.6}, {"width", 0.4}, {"frequency", 0.0}}}}}},
                {"tolerance", 1e-4}},
               run_toa_kernel});

  v.push_back({"coherent-energy", "Mean energy of arrival-time coherent states scales as 1/delta", "arrival-time operator",
               {{"mass", 1.0},
                {"grid", grid(-100.0, 100.0, 2048)},
                {"T0", 4.0},
                {"deltas", {1.0, 0.5, 0.25, 0.2, 0.125, 0.1}},
                {"ratio_tolerance", 0.1}},
               run_coherent_energy});

  v.push_back({"eigenstate-trigger", "Coherent arrival-time states sent through the clocked trigger", "arrival-time operator",
               {{"mass", 1.0},
                {"alpha", 1.0},
                {"deltas", {0.5, 0.25, 0.125}},
                {"slices", 48u},
                {"resolution_factor", 1.15},
                {"courant", 0.45},
                {"tolerance", 0.1}},
               run_eigenstate_trigger});
  return v;
}

}  // namespace

const std::vector<Experiment>& catalog() {
  static const std::vector<Experiment> experiments = build();
  return experiments;
}

const Experiment* find_experiment(std::string_view name) {
  const auto& c = catalog();
  const auto it = std::find_if(c.begin(), c.end(), [&](const Experiment& e) { return e.name == name; });
  return it == c.end() ? nullptr : &*it;
}

}  // namespace toa::cli
