// toa-spectrum, toa-drift, toa-kernel, coherent-energy, eigenstate-trigger

#include <algorithm>
#include <cmath>
#include <random>

#include "common.hpp"
#include "toa/parallel.hpp"
#include "toa/toa_operator.hpp"

namespace toa::cli {
namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, const std::vector<double>& range) {
  return range.at(0) + unit(rng) * (range.at(1) - range.at(0));
}

ToaWindow window_from(const Json& j) { return {num(j, "t_first"), num(j, "dT"), count(j, "n")}; }

KernelTestFunction kernel_fn(const Json& j) { return {num(j, "center"), num(j, "width"), num(j, "frequency")}; }

std::size_t power_of_two_at_least(double x) {
  std::size_t n = 16;
  while (static_cast<double>(n) < x) n *= 2;
  return n;
}

double bump(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

}  // namespace

Result run_toa_spectrum(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const GaussianSpec packet = packet_from(p["packet"], mass);
  const ToaWindow window = window_from(p["window"]);
  window.validate();
  const double eig_T = num(p, "eigen_time");
  const double eig_width = num(p, "eigen_energy_width");
  const WaveFunction psi = make_gaussian(grid, packet);
  Result r;
  if (ctx.dry_run) return r;

  const ToaState s = toa_transform(psi, mass, window);
  r.checks.push_back(within("right-mover completeness", s.norm2(), 1.0, num(p, "tolerance")));
  const double classical = mass * std::abs(packet.x0) / packet.k0;
  r.checks.push_back(within("peak near classical arrival", s.peak_time(), classical, mass * packet.sigma / packet.k0));

  // A standing wave splits its weight over the two sign sectors.
  GaussianSpec back = packet;
  back.k0 = -packet.k0;
  const WaveFunction standing = two_gaussian(grid, packet, back);
  const ToaState st = toa_transform(standing, mass, window);
  r.checks.push_back(within("standing-wave completeness", st.norm2(), 1.0, num(p, "tolerance")));

  // Narrow-band superposition of eigenfunctions is an approximate eigenvector of T'.
  const RegularizedToa op(grid, CutoffProfile::for_wavenumber(packet.k0), mass);
  WaveFunction e = toa_eigenfunction(grid, eig_T, mass);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double d = grid.k(j) - packet.k0;
    e[j] *= std::exp(-d * d / (2.0 * eig_width * eig_width));
  }
  WaveFunction residual = op.apply(e);
  residual -= cplx(eig_T) * e;
  const double eig_res = std::sqrt(residual.norm2() / e.norm2());
  r.values["eigenvector_residual"] = eig_res;
  r.values["mean_arrival"] = s.mean_time();
  r.values["peak_arrival"] = s.peak_time();
  r.values["completeness"] = s.norm2();

  Series out{"toa-distribution", {{"T", "time"}, {"density", "1/time"}}, {}};
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double d = std::norm(s.g[i]);
    if (d > 1e-14) out.rows.push_back({s.times[i], d});
  }
  r.series.push_back(std::move(out));
  return r;
}

Result run_toa_drift(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const CutoffProfile cutoff{num(p, "epsilon")};
  cutoff.validate();
  const Json& rs = p["random_states"];
  const std::size_t n_states = count(rs, "count");
  const auto x0_range = numbers(rs, "x0_range");
  const auto k0_range = numbers(rs, "k0_range");
  const auto sigma_range = numbers(rs, "sigma_range");
  const double t = num(p, "drift_time");
  const Json& kj = p["kick"];
  const Grid1D kick_grid = grid_from(kj["grid"]);
  const auto shifts = numbers(kj, "shifts");
  Result r;
  if (ctx.dry_run) return r;

  std::mt19937_64 rng(ctx.seed);
  std::vector<GaussianSpec> specs(n_states);
  for (auto& s : specs) {
    s.x0 = uniform(rng, x0_range);
    s.k0 = uniform(rng, k0_range);
    s.sigma = uniform(rng, sigma_range);
    s.mass = mass;
  }
  const RegularizedToa op(grid, cutoff, mass);
  struct Row {
    double comm_lit, comm_sq, drift, slope, slope_lit, slope_sq;
  };
  std::vector<Row> rows(n_states);
  parallel_for(n_states, [&](std::size_t i) {
    const WaveFunction psi = make_gaussian(grid, specs[i]);
    const cplx c = op.commutator_expectation(psi);
    const double o1 = op.cutoff_moment(psi, 1);
    const double o2 = op.cutoff_moment(psi, 2);
    const DriftResult d = toa_drift(op, psi, t);
    rows[i] = {std::abs(c + cplx(0.0, o1)), std::abs(c + cplx(0.0, o2)), std::abs(d.evolved - d.closed_form), d.slope,
               -(1.0 - o1), 1.0 - o2};
  });
  Series s{"drift",
           {{"x0", ""}, {"k0", ""}, {"sigma", ""}, {"commutator_vs_O", ""}, {"commutator_vs_O2", ""},
            {"drift_error", "time"}, {"slope", ""}, {"slope_literal", ""}, {"slope_O2", ""}},
           {}};
  double w_lit = 0, w_sq = 0, w_drift = 0, w_slope_lit = 0, w_slope_sq = 0;
  for (std::size_t i = 0; i < n_states; ++i) {
    const Row& q = rows[i];
    w_lit = std::max(w_lit, q.comm_lit);
    w_sq = std::max(w_sq, q.comm_sq);
    w_drift = std::max(w_drift, q.drift);
    w_slope_lit = std::max(w_slope_lit, std::abs(q.slope - q.slope_lit));
    w_slope_sq = std::max(w_slope_sq, std::abs(q.slope - q.slope_sq));
    s.rows.push_back({specs[i].x0, specs[i].k0, specs[i].sigma, q.comm_lit, q.comm_sq, q.drift, q.slope, q.slope_lit,
                      q.slope_sq});
  }
  const double tol = num(p, "tolerance");
  const double slope_tol = num(p, "slope_tolerance");
  r.checks.push_back(at_most("commutator = -i<O>", w_lit, tol));
  r.checks.push_back(at_most("commutator = -i<O^2>", w_sq, tol));
  r.checks.push_back(at_most("drift closed form vs evolved", w_drift, tol));
  r.checks.push_back(at_most("slope = -integral (1-O)|psi|^2", w_slope_lit, slope_tol));
  r.checks.push_back(at_most("slope = integral (1-O^2)|psi|^2", w_slope_sq, slope_tol));
  r.series.push_back(std::move(s));

  // Energy-shift kick exp(-i q T') on a state supported on [E_lo, E_hi].
  const double e_lo = num(kj, "energy_min");
  const double e_hi = num(kj, "energy_max");
  const double e_mid = 0.5 * (e_lo + e_hi);
  const double e_half = 0.5 * (e_hi - e_lo);
  const double arrival = num(kj, "arrival_phase");
  CVec v(kick_grid.size());
  for (std::size_t j = 0; j < kick_grid.size(); ++j) {
    const double k = kick_grid.k(j);
    if (k <= 0.0) continue;
    const double e = 0.5 * k * k / mass;
    v[j] = bump((e - e_mid) / e_half) * std::polar(1.0, arrival * e);
  }
  WaveFunction state(kick_grid, std::move(v), Representation::Momentum);
  state *= 1.0 / std::sqrt(state.norm2());
  const RegularizedToa kop(kick_grid, CutoffProfile{num(kj, "epsilon")}, mass);
  const ToaKick kick(kop);
  const double e0 = expectation(state, Observable::KineticEnergy, mass);
  Series ks{"kick", {{"q", "energy"}, {"energy_gain", "energy"}, {"relative_error", ""}}, {}};
  double worst = 0.0;
  for (double q : shifts) {
    const double gain = expectation(kick.apply(state, q), Observable::KineticEnergy, mass) - e0;
    const double rel = std::abs(gain - q) / std::abs(q);
    worst = std::max(worst, rel);
    ks.rows.push_back({q, gain, rel});
  }
  r.checks.push_back(at_most("kick energy gain relative error", worst, num(kj, "tolerance")));
  r.values["kick_initial_energy"] = e0;
  r.series.push_back(std::move(ks));
  return r;
}

Result run_toa_kernel(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  std::vector<std::pair<KernelTestFunction, KernelTestFunction>> configs;
  for (const auto& c : p.at("configurations")) configs.emplace_back(kernel_fn(c.at("f")), kernel_fn(c.at("g")));
  for (const auto& [f, g] : configs)
    if (!(f.width > 0.0) || !(g.width > 0.0)) throw Error(ErrorKind::InvalidArgument, "test-function widths must be positive");
  Result r;
  if (ctx.dry_run) return r;

  std::vector<KernelCheck> results(configs.size());
  parallel_for(configs.size(), [&](std::size_t i) {
    results[i] = overlap_kernel_check(configs[i].first, configs[i].second, mass);
  });
  Series s{"kernel", {{"config", ""}, {"smeared_re", ""}, {"smeared_im", ""}, {"closed_re", ""}, {"closed_im", ""},
                      {"residual", ""}}, {}};
  const double tol = num(p, "tolerance");
  for (std::size_t i = 0; i < results.size(); ++i) {
    const KernelCheck& k = results[i];
    s.rows.push_back({static_cast<double>(i), k.smeared.real(), k.smeared.imag(), k.closed_form.real(),
                      k.closed_form.imag(), k.residual});
    r.checks.push_back(at_most("kernel configuration " + std::to_string(i), k.residual, tol));
  }
  r.series.push_back(std::move(s));
  return r;
}

Result run_coherent_energy(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const double t0 = num(p, "T0");
  const auto deltas = numbers(p, "deltas");
  if (deltas.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two deltas");
  for (double d : deltas) CoherentToaSpec{t0, d, mass}.validate();
  Result r;
  if (ctx.dry_run) return r;

  std::vector<double> energy;
  Series s{"coherent-energy", {{"delta", "time"}, {"mean_energy", "energy"}, {"closed_form", "energy"}}, {}};
  double worst_closed = 0.0;
  for (double d : deltas) {
    const CoherentToaSpec spec{t0, d, mass};
    const double e = expectation(coherent_toa_state(grid, spec), Observable::KineticEnergy, mass);
    const double closed = coherent_mean_energy(spec);
    worst_closed = std::max(worst_closed, std::abs(e - closed) / closed);
    energy.push_back(e);
    s.rows.push_back({d, e, closed});
  }
  // Every pair whose deltas differ by a factor of two.
  const double tol = num(p, "ratio_tolerance");
  double worst_ratio = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    for (std::size_t j = 0; j < deltas.size(); ++j)
      if (std::abs(deltas[i] / deltas[j] - 2.0) < 1e-12) {
        worst_ratio = std::max(worst_ratio, std::abs(energy[j] / energy[i] / 2.0 - 1.0));
        ++pairs;
      }
  const double span = *std::max_element(deltas.begin(), deltas.end()) / *std::min_element(deltas.begin(), deltas.end());
  r.checks.push_back(at_least("delta span", span, 10.0 - 1e-9));
  r.checks.push_back(at_least("halving pairs", static_cast<double>(pairs), 1.0));
  r.checks.push_back(at_most("energy ratio under halving, relative to 2", worst_ratio, tol));
  r.values["closed_form_relative_error"] = worst_closed;
  r.series.push_back(std::move(s));
  return r;
}

Result run_eigenstate_trigger(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const double alpha = num(p, "alpha");
  const auto deltas = numbers(p, "deltas");
  const std::size_t slices = count(p, "slices");
  const double fac = num(p, "resolution_factor");
  const double courant = num(p, "courant");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw Error(ErrorKind::InvalidArgument, "deltas must be strictly descending");

  // Per-delta fixture: the state starts 30 delta before the trigger; the box
  // holds the slow |x|^-3 tail and the grid resolves energies to ~12/delta.
  struct Setup {
    Grid1D grid;
    EigenstateTriggerSetup s;
  };
  std::vector<Setup> setups;
  for (double d : deltas) {
    const double half = std::max(100.0, 500.0 * std::sqrt(d));
    const double k_need = std::sqrt(2.0 * mass * 12.0 / d);
    const Grid1D grid(-half, half, power_of_two_at_least(2.0 * half * fac * k_need / kPi));
    EigenstateTriggerSetup s;
    s.state = {30.0 * d, d, mass};
    s.alpha = alpha;
    s.clock.accuracy = d;
    s.clock.n_slices = slices;
    s.evolution.mass = mass;
    s.evolution.dt = courant / grid.e_max(mass);
    const double duration = 38.0 * d + 20.0 / std::sqrt(2.0 * coherent_mean_energy(s.state) / mass);
    s.evolution.n_steps = static_cast<std::size_t>(duration / s.evolution.dt);
    s.state.validate();
    s.clock.validate();
    s.evolution.validate(grid);
    setups.push_back({grid, s});
  }
  Result r;
  if (ctx.dry_run) return r;

  std::vector<EigenstateTriggerResult> out(setups.size());
  parallel_for(setups.size(), [&](std::size_t i) { out[i] = eigenstate_trigger_experiment(setups[i].grid, setups[i].s); });

  Series s{"eigenstate-trigger",
           {{"delta", "time"}, {"detection", "probability"}, {"flux_average", "probability"},
            {"ideal_delta_flux_average", "probability"}, {"relative_deviation", ""}},
           {}};
  std::vector<double> detection;
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double rel = std::abs(out[i].detection - out[i].oracle) / out[i].oracle;
    worst = std::max(worst, rel);
    detection.push_back(out[i].detection);
    s.rows.push_back({deltas[i], out[i].detection, out[i].oracle, out[i].delta_oracle, rel});
  }
  r.checks.push_back(holds("detection decreases as delta shrinks", monotone_decreasing(detection)));
  r.checks.push_back(at_most("detection vs flux-average oracle (relative)", worst, num(p, "tolerance")));
  r.series.push_back(std::move(s));
  return r;
}

}  // namespace toa::cli
