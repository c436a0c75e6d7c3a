// trigger-flip, multi-trigger, clock-accuracy-scan

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "common.hpp"
#include "toa/parallel.hpp"
#include "toa/propagator.hpp"
#include "toa/scattering.hpp"

namespace toa::cli {
namespace {

CaptureSpec capture_from(const Json& j) {
  CaptureSpec c;
  c.inner_radius = num(j, "inner_radius");
  c.ramp_width = num(j, "ramp_width");
  c.rate = num(j, "rate");
  c.min_wavenumber = num(j, "min_wavenumber");
  return c;
}

double max_deviation(const ScatterAmplitudes& a, const ChannelScattering& b) {
  return std::max({std::abs(a.phi_R_up - b.transmitted[0]), std::abs(a.phi_R_down - b.transmitted[1]),
                   std::abs(a.phi_L_up - b.reflected[0]), std::abs(a.phi_L_down - b.reflected[1])});
}

// Portable uniform draw in [0, 1).
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
}

}  // namespace

Result run_trigger_flip(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const GaussianSpec packet = packet_from(p["packet"], mass);
  const double alpha = num(p["model"], "alpha");
  const EvolutionParams ep = evolution_from(p["evolution"], grid, mass);
  const CaptureSpec capture = capture_from(p["capture"]);
  const double tol = num(p, "tolerance");
  const WaveFunction psi = make_gaussian(grid, packet);
  const PotentialSpec pot = PotentialSpec::trigger(alpha);
  pot.validate();
  Result r;
  if (ctx.dry_run) return r;

  const SpinorRun run = evolve_spinor_captured(SpinorWave::spin_up(psi), pot, ep, capture);
  const double flip = run.down_probability();
  const double analytic = detection_probability_limit(0.5 * packet.k0 * packet.k0 / mass, 0.0, mass);
  // Finite-alpha stationary prediction averaged over the packet's momentum distribution.
  const WaveFunction mom = to_momentum(psi);
  double averaged = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double k = grid.k(j);
    if (k <= 0.0) continue;
    averaged += std::norm(mom[j]) * grid.dk() *
                detection_probability(clock_scatter({mass, alpha, 0.5 * k * k / mass, 0.0}));
  }

  r.checks.push_back(within("wavepacket flip probability", flip, 0.5, tol));
  r.checks.push_back(within("analytic flip probability", analytic, 0.5, 0.0));
  r.checks.push_back(within("single-spin formula", trigger_flip_probability(1), 0.5, 0.0));
  r.checks.push_back(at_most("norm drift", std::abs(run.norm2() - 1.0), 1e-4));
  r.values["flip_probability"] = flip;
  r.values["finite_alpha_average"] = averaged;
  r.values["analytic_limit"] = analytic;
  r.values["norm"] = run.norm2();
  r.values["realized_delta_width"] = pot.delta_width(grid, alpha);
  r.series.push_back({"flip",
                      {{"alpha", ""}, {"wavepacket", "probability"}, {"stationary_average", "probability"},
                       {"limit", "probability"}},
                      {{alpha, flip, averaged, analytic}}});
  return r;
}

Result run_multi_trigger(const Json& p, const RunContext& ctx) {
  const auto counts = p.at("spin_counts").get<std::vector<int>>();
  const double mass = num(p, "mass");
  const double energy = num(p, "kinetic_energy");
  for (int n : counts)
    if (n < 1 || n > 60) throw Error(ErrorKind::InvalidArgument, "spin counts must lie in 1..60");
  Result r;
  if (ctx.dry_run) return r;

  // Independent path: each spin is a separate alpha -> infinity trigger that
  // lets half of whatever is still undetected through unflipped.
  const double single = detection_probability_limit(energy, 0.0, mass);
  Series s{"multi-trigger", {{"spins", ""}, {"formula", "probability"}, {"sequential", "probability"}}, {}};
  double worst = 0.0;
  for (int n : counts) {
    const double formula = trigger_flip_probability(n);
    double undetected = 1.0;
    for (int i = 0; i < n; ++i) undetected *= 1.0 - single;
    const double sequential = 1.0 - undetected;
    const double exact = 1.0 - std::ldexp(1.0, -n);
    worst = std::max({worst, std::abs(formula - exact), std::abs(sequential - exact)});
    s.rows.push_back({static_cast<double>(n), formula, sequential});
    r.values["N=" + std::to_string(n)] = formula;
  }
  r.checks.push_back(at_most("max deviation from 1-2^-N", worst, 4.0 * std::numeric_limits<double>::epsilon()));
  r.series.push_back(std::move(s));
  return r;
}

Result run_clock_accuracy_scan(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Json& mj = p["matching"];
  const Json& lj = p["limit_law"];
  const Json& aj = p["accuracy_scan"];
  const Json& cj = p["cross_validation"];
  const auto products = numbers(aj, "products");
  if (products.size() < 2) throw Error(ErrorKind::InvalidArgument, "accuracy_scan.products needs two entries");
  const Grid1D grid = grid_from(cj["grid"]);
  const GaussianSpec packet = packet_from(cj["packet"], mass);
  const EvolutionParams ep = evolution_from(cj["evolution"], grid, mass);
  const double cv_alpha = num(cj, "alpha");
  const double cv_p = num(cj, "clock_momentum");
  const auto probes = numbers(cj, "probe_wavenumbers");
  CaptureSpec capture = capture_from(cj["capture"]);
  capture.probes = clock_probe_wavenumbers(probes, cv_p, mass);
  const WaveFunction psi = make_gaussian(grid, packet);
  Result r;
  if (ctx.dry_run) return r;

  // Matching formula against transfer matrices.
  {
    std::mt19937_64 rng(ctx.seed);
    const std::size_t draws = count(mj, "draws");
    double worst_amp = 0.0;
    double worst_flux = 0.0;
    Series s{"matching",
             {{"alpha", ""}, {"kinetic_energy", ""}, {"clock_momentum", ""}, {"amplitude_deviation", ""},
              {"flux_residual", ""}},
             {}};
    for (std::size_t i = 0; i < draws; ++i) {
      const double alpha = log_uniform(rng, num(mj, "alpha_min"), num(mj, "alpha_max"));
      const double ek = log_uniform(rng, num(mj, "energy_min"), num(mj, "energy_max"));
      const double pc = unit(rng) * num(mj, "clock_momentum_max");
      const ScatterAmplitudes a = clock_scatter({mass, alpha, ek, pc});
      PiecewiseChannels pw;
      pw.regions = {SpinMatrix::diag(pc, 0.0)};
      pw.deltas = {{0.0, SpinMatrix::up_x_projector(), alpha}};
      const ChannelScattering b = scatter_piecewise(pw, ek + pc, mass, 0);
      const double dev = max_deviation(a, b);
      const double flux = std::max(std::abs(a.flux_ratio() - 1.0), std::abs(b.flux_ratio() - 1.0));
      worst_amp = std::max(worst_amp, dev);
      worst_flux = std::max(worst_flux, flux);
      s.rows.push_back({alpha, ek, pc, dev, flux});
    }
    r.checks.push_back(at_most("matching amplitude deviation", worst_amp, num(mj, "amplitude_tolerance")));
    r.checks.push_back(at_most("matching flux residual", worst_flux, num(mj, "flux_tolerance")));
    r.series.push_back(std::move(s));
  }

  // alpha -> infinity: Richardson extrapolation in 1/alpha over a doubling scan.
  {
    const double ek = num(lj, "kinetic_energy");
    const auto momenta = numbers(lj, "clock_momenta");
    const double a0 = num(lj, "alpha_start");
    Series s{"alpha-limit", {{"clock_momentum", ""}, {"extrapolated", ""}, {"limit_law", ""}}, {}};
    double worst = 0.0;
    for (double pc : momenta) {
      std::array<double, 4> f{};
      for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::abs(clock_scatter({mass, a0 * std::ldexp(1.0, static_cast<int>(i)), ek, pc}).phi_R_down);
      // Three Richardson sweeps remove the 1/alpha, 1/alpha^2 and 1/alpha^3 terms.
      for (int level = 1; level < 4; ++level)
        for (std::size_t i = 0; i + level < f.size(); ++i) {
          const double w = std::ldexp(1.0, level);
          f[i] = (w * f[i + 1] - f[i]) / (w - 1.0);
        }
      const double law = std::sqrt(ek) / (std::sqrt(ek) + std::sqrt(ek + pc));
      worst = std::max(worst, std::abs(f[0] - law));
      s.rows.push_back({pc, f[0], law});
    }
    r.checks.push_back(at_most("alpha-scan extrapolation vs limit law", worst, num(lj, "tolerance")));
    r.series.push_back(std::move(s));

    // Log-log slope of the limiting detection probability at large p / E_k.
    const double lo = num(lj, "slope_ratio_min");
    const double hi = num(lj, "slope_ratio_max");
    const std::size_t n = count(lj, "slope_points");
    Series t{"detection-asymptote", {{"p_over_E", ""}, {"detection", "probability"}}, {}};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ratio = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
      const double d = detection_probability_limit(ek, ratio * ek, mass);
      const double x = std::log(ratio);
      const double y = std::log(d);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      t.rows.push_back({ratio, d});
    }
    const double nn = static_cast<double>(n);
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    r.checks.push_back(within("detection asymptote log-log slope", slope, -0.5, num(lj, "slope_tolerance")));
    r.values["asymptote_slope"] = slope;
    r.series.push_back(std::move(t));
  }

  // Detection against clock accuracy for the ideal trigger.
  {
    const double ek = num(aj, "kinetic_energy");
    std::vector<double> detection(products.size());
    parallel_for(products.size(), [&](std::size_t i) {
      detection[i] = clock_detection_average(ek, products[i] / ek, mass, std::numeric_limits<double>::infinity());
    });
    Series s{"accuracy-scan", {{"accuracy_times_energy", ""}, {"accuracy", "time"}, {"detection", "probability"}}, {}};
    for (std::size_t i = 0; i < products.size(); ++i) s.rows.push_back({products[i], products[i] / ek, detection[i]});
    const auto hi_it = std::max_element(products.begin(), products.end());
    const auto lo_it = std::min_element(products.begin(), products.end());
    const double d_hi = detection[static_cast<std::size_t>(hi_it - products.begin())];
    const double d_lo = detection[static_cast<std::size_t>(lo_it - products.begin())];
    r.checks.push_back(at_least("detection at largest accuracy product", d_hi, num(aj, "high_threshold")));
    r.checks.push_back(at_most("detection at smallest accuracy product", d_lo, num(aj, "low_threshold")));
    // Products are listed in decreasing order, so detection must fall along the list.
    std::vector<std::pair<double, double>> sorted;
    for (std::size_t i = 0; i < products.size(); ++i) sorted.emplace_back(-products[i], detection[i]);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> ordered;
    for (const auto& [x, d] : sorted) ordered.push_back(d);
    r.checks.push_back(holds("detection monotone in accuracy product", monotone_decreasing(ordered)));
    r.values["detection_high"] = d_hi;
    r.values["detection_low"] = d_lo;
    r.series.push_back(std::move(s));
  }

  // Wavepacket vs stationary amplitudes for one clock slice.
  {
    const PotentialSpec pot = PotentialSpec::trigger_clock(cv_alpha, cv_p);
    const SpinorRun run = evolve_spinor_captured(SpinorWave::spin_up(psi), pot, ep, capture);
    const OutgoingWaves out = run.outgoing(pot);
    const PiecewiseChannels band = pot.band_limited(grid, 8, count(cj, "band_half_window"));
    Series s{"clock-cross-validation",
             {{"k", ""}, {"phi_R_up_error", ""}, {"phi_R_down_error", ""}, {"phi_L_up_error", ""},
              {"phi_L_down_error", ""}, {"delta_model_deviation", ""}},
             {}};
    double worst = 0.0;
    for (double k : probes) {
      const ScatterAmplitudes a = resolve_clock_amplitudes(out, psi, k, cv_p, mass);
      const ChannelScattering b = scatter_piecewise(band, 0.5 * k * k / mass + cv_p, mass, 0);
      const ScatterAmplitudes ideal = clock_scatter({mass, cv_alpha, 0.5 * k * k / mass, cv_p});
      const double dev = max_deviation(a, b);
      worst = std::max(worst, dev);
      s.rows.push_back({k, std::abs(a.phi_R_up - b.transmitted[0]), std::abs(a.phi_R_down - b.transmitted[1]),
                        std::abs(a.phi_L_up - b.reflected[0]), std::abs(a.phi_L_down - b.reflected[1]),
                        max_deviation(ideal, b)});
    }
    r.checks.push_back(at_most("clock wavepacket vs stationary amplitudes", worst, num(cj, "tolerance")));
    r.values["cross_validation_norm"] = run.norm2();
    r.series.push_back(std::move(s));
  }
  return r;
}

}  // namespace toa::cli
