// two-gaussian, zero-current, cascade, booster

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "toa/measurement.hpp"
#include "toa/propagator.hpp"
#include "toa/scattering.hpp"

namespace toa::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CaptureSpec capture_from(const Json& j) {
  CaptureSpec c;
  c.inner_radius = num(j, "inner_radius");
  c.ramp_width = num(j, "ramp_width");
  c.rate = num(j, "rate");
  c.min_wavenumber = num(j, "min_wavenumber");
  return c;
}

void add_readout_series(Result& r, const std::string& name, const ArrivalSeries& s) {
  Series out{name, {{"t", "time"}, {"density", "1/time"}, {"probability", "probability"}}, {}};
  for (std::size_t i = 0; i < s.times.size(); ++i)
    out.rows.push_back({s.times[i], s.probabilities[i] / s.bin_width, s.probabilities[i]});
  r.series.push_back(std::move(out));
}

}  // namespace

Result run_two_gaussian(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Json& pk = p["packets"];
  const GaussianSpec a{num(pk, "x0"), num(pk, "k1"), num(pk, "sigma"), mass};
  const GaussianSpec b{num(pk, "x0"), num(pk, "k2"), num(pk, "sigma"), mass};
  if (!(a.k0 > 0.0 && b.k0 > a.k0)) throw Error(ErrorKind::InvalidArgument, "need 0 < k1 < k2");
  const double coarse = num(p, "coarse_accuracy");
  const double fine = num(p, "fine_accuracy");
  const double split = num(p, "split_time");
  const Json& rj = p["readout"];
  StationaryReadoutSpec spec;
  spec.mass = mass;
  spec.period = num(rj, "period");
  spec.wavenumber_max = num(rj, "wavenumber_max");
  spec.wavenumber_points = count(rj, "wavenumber_points");
  spec.accuracy = coarse;
  spec.validate();
  const Json& wj = p["wavepacket_check"];
  const bool cross_check = wj.at("enabled").get<bool>();
  const Grid1D grid = grid_from(wj["grid"]);
  const EvolutionParams ep = evolution_from(wj["evolution"], grid, mass);
  Result r;
  if (ctx.dry_run) return r;

  auto incident = [&](double k) { return (gaussian_amplitude(a, k) + gaussian_amplitude(b, k)) / std::sqrt(2.0); };
  const double k_top = b.k0 + 8.0 / b.sigma;
  const ArrivalSeries coarse_run = stationary_clock_readout(incident, k_top, spec);
  spec.accuracy = fine;
  const ArrivalSeries fine_run = stationary_clock_readout(incident, k_top, spec);

  const double coarse_t1 = coarse_run.weight_between(split, kInf);
  const double fine_t1 = fine_run.weight_between(split, kInf);
  const double coarse_t2 = coarse_run.weight_between(-kInf, split);
  const double fine_t2 = fine_run.weight_between(-kInf, split);
  const double slow_scale = 2.0 * mass / (a.k0 * a.k0);
  const double fast_scale = 2.0 * mass / (b.k0 * b.k0);
  r.checks.push_back(holds("fine accuracy between 2m/k2^2 and 2m/k1^2", fine < slow_scale && fine > fast_scale, fine));
  r.checks.push_back(at_least("t1-peak suppression factor", coarse_t1 / fine_t1, num(p, "suppression_factor")));
  r.checks.push_back(at_most("coarse readout completeness", std::abs(coarse_run.detected() + coarse_run.residual - 1.0),
                             1e-3));
  r.values["coarse"] = {{"detected", coarse_run.detected()}, {"t1_weight", coarse_t1}, {"t2_weight", coarse_t2}};
  r.values["fine"] = {{"detected", fine_run.detected()}, {"t1_weight", fine_t1}, {"t2_weight", fine_t2}};
  r.values["conditional_t1_ratio"] = (coarse_t1 / coarse_run.detected()) / (fine_t1 / fine_run.detected());
  add_readout_series(r, "coarse-clock", coarse_run);
  add_readout_series(r, "fine-clock", fine_run);

  if (cross_check) {
    // The coarse clock also run as a full wavepacket + clock-slice simulation.
    const WaveFunction psi = two_gaussian(grid, a, b);
    ClockSpec clock;
    clock.accuracy = coarse;
    clock.n_slices = count(wj, "slices");
    const ClockJointState st =
        evolve_with_clock(SpinorWave::spin_up(psi), clock, num(wj, "alpha"), ep, capture_from(wj["capture"]));
    const ArrivalSeries wp = clock_readout(st, ReadoutOptions{1.0, num(wj, "premature_tolerance")});
    const double wp_t1 = wp.weight_between(split, kInf);
    const double wp_t2 = wp.weight_between(-kInf, split);
    const double tol = num(wj, "tolerance");
    r.checks.push_back(within("wavepacket coarse t1 weight", wp_t1, coarse_t1, tol));
    r.checks.push_back(within("wavepacket coarse t2 weight", wp_t2, coarse_t2, tol));
    r.values["wavepacket_coarse"] = {{"t1_weight", wp_t1}, {"t2_weight", wp_t2}, {"norm", st.total_norm2()}};
    add_readout_series(r, "coarse-clock-wavepacket", wp);
  }
  return r;
}

Result run_zero_current(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const double k = num(p, "wavenumber");
  const double width = num(p, "window_width");
  const double alpha = num(p, "alpha");
  const EvolutionParams ep = evolution_from(p["evolution"], grid, mass);
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "window_width must be positive");
  Result r;
  if (ctx.dry_run) return r;

  auto windowed = [&](bool odd) {
    WaveFunction psi(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.x(i);
      psi[i] = (odd ? std::sin(k * x) : std::cos(k * x)) * std::exp(-x * x / (4.0 * width * width));
    }
    psi *= 1.0 / std::sqrt(psi.norm2());
    return psi;
  };
  const PotentialSpec pot = PotentialSpec::trigger(alpha);
  Series s{"zero-current", {{"variant", ""}, {"current_at_detector", "1/time"}, {"flip", "probability"}}, {}};
  double flips[2];
  double currents[2];
  for (int odd = 0; odd < 2; ++odd) {
    const WaveFunction psi = windowed(odd != 0);
    currents[odd] = probability_current(psi, 0.0, mass);
    flips[odd] = evolve_spinor(SpinorWave::spin_up(psi), pot, ep).down.norm2();
    s.rows.push_back({static_cast<double>(odd), currents[odd], flips[odd]});
  }
  r.checks.push_back(at_most("current at detector", std::abs(currents[0]), num(p, "current_tolerance")));
  r.checks.push_back(at_most("standing-wave flip probability", flips[0], num(p, "flip_tolerance")));
  r.values["cos_flip"] = flips[0];
  r.values["sin_flip"] = flips[1];
  r.values["realized_delta_width"] = pot.delta_width(grid, alpha);
  r.series.push_back(std::move(s));
  return r;
}

Result run_cascade(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const GaussianSpec packet = packet_from(p["packet"], mass);
  const EvolutionParams ep = evolution_from(p["evolution"], grid, mass);
  ClockSpec clock;
  clock.accuracy = num(p["clock"], "accuracy");
  clock.n_slices = count(p["clock"], "slices");
  clock.validate();
  CascadeParams cp;
  cp.x_a = num(p, "x_a");
  const WaveFunction psi = make_gaussian(grid, packet);
  Result r;
  if (ctx.dry_run) return r;

  const ArrivalSeries sloped = cascade_readout(cascade_evolve(psi, clock, cp, ep));
  cp.uniform = true;
  const CascadeState flat_state = cascade_evolve(psi, clock, cp, ep);
  const ArrivalSeries flat = cascade_readout(flat_state);

  const double classical = mass * std::abs(packet.x0) / packet.k0;
  const double time_width = mass * packet.sigma / packet.k0;
  const double peak = refined_peak(sloped);
  r.checks.push_back(within("coarse-clock mean arrival", sloped.mean_time(), classical, time_width));
  r.checks.push_back(within("coarse-clock peak arrival", peak, classical, time_width));
  // V = -1 everywhere: every slice is the free evolution times exp(i p elapsed),
  // i.e. the pointer moved by exactly the elapsed time.
  const WaveFunction free = to_position(free_evolve(psi, flat_state.elapsed, mass));
  double translation_error = 0.0;
  for (std::size_t l = 0; l < flat_state.slices.size(); ++l) {
    WaveFunction expected = std::polar(1.0, flat_state.momenta[l] * flat_state.elapsed) * free;
    expected -= flat_state.slices[l];
    translation_error = std::max(translation_error, std::sqrt(expected.norm2()));
  }
  r.checks.push_back(at_most("uniform slope: pointer shift equals elapsed time", translation_error,
                             num(p, "uniform_tolerance")));
  // Reading y0 - y against elapsed time: arrival t = elapsed - reading.
  const double reading = flat_state.elapsed - flat.mean_time();
  r.checks.push_back(within("uniform slope: mean clock reading", reading, flat_state.elapsed, 1e-6));
  r.values["classical_arrival"] = classical;
  r.values["mean_arrival"] = sloped.mean_time();
  r.values["peak_arrival"] = peak;
  r.values["kept_weight"] = sloped.detected();
  r.values["uniform_reading"] = reading;
  r.values["elapsed"] = flat_state.elapsed;
  add_readout_series(r, "cascade", sloped);
  add_readout_series(r, "uniform", flat);
  return r;
}

Result run_booster(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Json& bj = p["model"];
  BoosterParams bp{mass, num(bj, "alpha"), num(bj, "W"), num(bj, "V1"), num(bj, "V2"), 0.0};
  const auto energies = numbers(p, "energies");
  const Json& cj = p["cross_validation"];
  const Grid1D grid = grid_from(cj["grid"]);
  const GaussianSpec packet = packet_from(cj["packet"], mass);
  const EvolutionParams ep = evolution_from(cj["evolution"], grid, mass);
  const auto probes = numbers(cj, "probe_wavenumbers");
  CaptureSpec capture = capture_from(cj["capture"]);
  for (double e : energies) {
    bp.energy = e;
    bp.validate();
  }
  for (double k : probes) {
    bp.energy = 0.5 * k * k / mass;
    bp.validate();
  }
  capture.probes = booster_probe_wavenumbers(probes, bp);
  const WaveFunction psi = make_gaussian(grid, packet);
  Result r;
  if (ctx.dry_run) return r;

  // Stationary scan: flux bookkeeping and the transfer-matrix tie.
  Series s{"booster",
           {{"energy", "energy"}, {"reflected_up", "probability"}, {"transmitted_down", "probability"},
            {"flux_residual", ""}, {"transfer_matrix_deviation", ""}},
           {}};
  double worst_flux = 0.0;
  double worst_tm = 0.0;
  for (double e : energies) {
    bp.energy = e;
    const BoosterAmplitudes a = booster_scatter(bp);
    PiecewiseChannels pw;
    pw.boundaries = {0.0};
    pw.regions = {SpinMatrix::diag(0.0, bp.V1), SpinMatrix::diag(bp.W, -bp.V2)};
    pw.deltas = {{0.0, SpinMatrix::sigma_x(), bp.alpha}};
    const ChannelScattering b = scatter_piecewise(pw, e, mass, 0);
    const double tm = std::max(std::abs(a.phi_L_up - b.reflected[0]), std::abs(a.phi_R_down - b.transmitted[1]));
    worst_flux = std::max(worst_flux, std::abs(a.flux_ratio() - 1.0));
    worst_tm = std::max(worst_tm, tm);
    s.rows.push_back({e, a.reflected_up(), a.transmitted_down(), a.flux_ratio() - 1.0, tm});
  }
  r.checks.push_back(at_most("booster flux residual", worst_flux, 1e-9));
  r.checks.push_back(at_most("booster vs transfer matrices", worst_tm, 1e-6));
  r.series.push_back(std::move(s));

  // Wavepacket vs stationary amplitudes.
  const PotentialSpec pot = PotentialSpec::booster(bp);
  const SpinorRun run = evolve_spinor_captured(SpinorWave::spin_up(psi), pot, ep, capture);
  const OutgoingWaves out = run.outgoing(pot);
  const PiecewiseChannels band = pot.band_limited(grid, 8, count(cj, "band_half_window"));
  Series c{"booster-cross-validation",
           {{"k", ""}, {"phi_L_up_error", ""}, {"phi_R_down_error", ""}, {"delta_model_deviation", ""}},
           {}};
  double worst = 0.0;
  for (double k : probes) {
    bp.energy = 0.5 * k * k / mass;
    const BoosterAmplitudes a = resolve_booster_amplitudes(out, psi, k, bp);
    const ChannelScattering b = scatter_piecewise(band, bp.energy, mass, 0);
    const BoosterAmplitudes ideal = booster_scatter(bp);
    const double eu = std::abs(a.phi_L_up - b.reflected[0]);
    const double ed = std::abs(a.phi_R_down - b.transmitted[1]);
    worst = std::max({worst, eu, ed});
    c.rows.push_back({k, eu, ed,
                      std::max(std::abs(ideal.phi_L_up - b.reflected[0]), std::abs(ideal.phi_R_down - b.transmitted[1]))});
  }
  r.checks.push_back(at_most("booster wavepacket vs stationary amplitudes", worst, num(cj, "tolerance")));
  r.values["cross_validation_norm"] = run.norm2();
  r.series.push_back(std::move(c));
  return r;
}

}  // namespace toa::cli
