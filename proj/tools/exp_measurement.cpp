// zeno-scan, current-vs-arrival, presence-vs-arrival

#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "toa/measurement.hpp"
#include "toa/parallel.hpp"

namespace toa::cli {

Result run_zeno_scan(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const GaussianSpec packet = packet_from(p["packet"], mass);
  const double x_a = num(p, "detector_x");
  const double t_max = num(p, "t_max");
  const double dt = num(p, "dt");
  const auto deltas = numbers(p, "deltas");
  const std::size_t tail = count(p, "monotone_tail");
  if (deltas.size() < tail || tail < 2) throw Error(ErrorKind::InvalidArgument, "need at least monotone_tail deltas");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw Error(ErrorKind::InvalidArgument, "deltas must be strictly descending");
  std::vector<MeasurementSchedule> schedules;
  for (double d : deltas) {
    MeasurementSchedule s{x_a, d, t_max, EvolutionParams{d / std::ceil(d / dt - 1e-9), 0, mass}};
    s.validate();
    schedules.push_back(s);
  }
  const WaveFunction psi = make_gaussian(grid, packet);
  Result r;
  if (ctx.dry_run) return r;

  std::vector<ArrivalSeries> runs(schedules.size());
  parallel_for(schedules.size(), [&](std::size_t i) { runs[i] = repeated_measurement_arrival(psi, schedules[i]); });

  Series s{"zeno", {{"delta", "time"}, {"detection", "probability"}, {"residual", "probability"},
                    {"completeness_error", ""}}, {}};
  std::vector<double> detection;
  double worst_sum = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    double sum = runs[i].residual;
    for (double q : runs[i].probabilities) sum += q;
    const double err = std::abs(sum - psi.norm2());
    worst_sum = std::max(worst_sum, err);
    detection.push_back(runs[i].detected());
    s.rows.push_back({deltas[i], runs[i].detected(), runs[i].residual, err});
  }
  const std::vector<double> last(detection.end() - static_cast<std::ptrdiff_t>(tail), detection.end());
  r.checks.push_back(holds("detection decreasing over the smallest intervals", monotone_decreasing(last)));
  r.checks.push_back(at_most("detection at smallest interval", detection.back(), num(p, "threshold")));
  r.checks.push_back(at_most("outcome completeness", worst_sum, 1e-9));
  r.values["detection_smallest_delta"] = detection.back();
  r.values["detection_largest_delta"] = detection.front();
  r.series.push_back(std::move(s));

  Series a{"arrival-largest-delta", {{"t", "time"}, {"probability", "probability"}}, {}};
  for (std::size_t i = 0; i < runs.front().times.size(); ++i)
    a.rows.push_back({runs.front().times[i], runs.front().probabilities[i]});
  r.series.push_back(std::move(a));
  return r;
}

Result run_current_vs_arrival(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const double x_a = num(p, "detector_x");
  const auto probe_times = numbers(p, "continuity_times");
  const double t_end = num(p, "t_end");
  const std::size_t samples = count(p, "samples");
  if (samples < 3 || !(t_end > 0.0)) throw Error(ErrorKind::InvalidArgument, "need samples >= 3 and t_end > 0");
  std::vector<GaussianSpec> packets;
  for (const auto& j : p.at("packets")) packets.push_back(packet_from(j, mass));
  std::vector<WaveFunction> states;
  for (const auto& g : packets) states.push_back(make_gaussian(grid, g));
  Result r;
  if (ctx.dry_run) return r;

  Series c{"continuity", {{"packet", ""}, {"t", "time"}, {"current", "1/time"}, {"weight_rate", "1/time"},
                          {"difference", "1/time"}}, {}};
  double worst = 0.0;
  for (std::size_t n = 0; n < states.size(); ++n) {
    for (double t : probe_times) {
      const WaveFunction psi = free_evolve(states[n], t, mass);
      const double j = probability_current(psi, x_a, mass);
      const double rate = half_line_weight_rate(psi, x_a, mass);
      worst = std::max(worst, std::abs(rate - j));
      c.rows.push_back({static_cast<double>(n), t, j, rate, rate - j});
    }
  }
  r.checks.push_back(at_most("continuity |dP+/dt - j|", worst, num(p, "tolerance")));
  r.series.push_back(std::move(c));

  // Current of the first packet over time, and its integral against the transmitted weight.
  std::vector<double> times(samples);
  for (std::size_t i = 0; i < samples; ++i) times[i] = t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
  const std::vector<double> j = current_series(states.front(), x_a, times, mass);
  const double h = times[1] - times[0];
  double integral = 0.0;
  for (std::size_t i = 1; i < samples; ++i) integral += 0.5 * h * (j[i] + j[i - 1]);
  const double gained = half_line_weight(free_evolve(states.front(), t_end, mass), x_a) -
                        half_line_weight(states.front(), x_a);
  Series cs{"current", {{"t", "time"}, {"current", "1/time"}}, {}};
  for (std::size_t i = 0; i < samples; ++i) cs.rows.push_back({times[i], j[i]});
  r.series.push_back(std::move(cs));

  // Heisenberg projectors at different times do not commute: the current is
  // not a joint distribution of "arrived by t" events.
  const double t1 = num(p, "commutator_t1");
  const double t2 = num(p, "commutator_t2");
  const double comm = projector_commutator_norm(states.front(), x_a, t1, t2, mass);
  r.checks.push_back(at_least("projector commutator witness", comm, num(p, "commutator_threshold")));
  r.values["max_continuity_error"] = worst;
  r.values["current_integral"] = integral;
  r.values["transmitted_weight_gain"] = gained;
  r.values["commutator_norm"] = comm;
  return r;
}

Result run_presence_vs_arrival(const Json& p, const RunContext& ctx) {
  const double mass = num(p, "mass");
  const Grid1D grid = grid_from(p["grid"]);
  const Json& pk = p["packets"];
  const GaussianSpec a{num(pk, "x0"), num(pk, "k1"), num(pk, "sigma"), mass};
  const GaussianSpec b{num(pk, "x0"), num(pk, "k2"), num(pk, "sigma"), mass};
  const double x_a = num(p, "detector_x");
  const double t0 = num(p, "t_start");
  const double t1 = num(p, "t_end");
  const double delta = num(p, "delta");
  const double dt = num(p, "dt");
  MeasurementSchedule sched{x_a, delta, t1, EvolutionParams{delta / std::ceil(delta / dt - 1e-9), 0, mass}};
  sched.validate();
  const WaveFunction psi = two_gaussian(grid, a, b);
  Result r;
  if (ctx.dry_run) return r;

  const ArrivalSeries arrival = repeated_measurement_arrival(psi, sched);
  // Presence sampled at the same instants as the looks.
  const std::size_t n = static_cast<std::size_t>(std::llround((t1 - t0) / delta)) + 1;
  const PresenceDistribution presence = presence_distribution(psi, x_a, t0, t1, n, mass);
  const std::vector<double> arrival_density = [&] {
    std::vector<double> d = arrival.conditional();
    for (double& v : d) v /= arrival.bin_width;
    return d;
  }();
  Series s{"presence-vs-arrival", {{"t", "time"}, {"presence", "1/time"}, {"arrival", "1/time"}}, {}};
  double peak = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < arrival.times.size(); ++i) {
    const double t = arrival.times[i];
    const std::size_t idx = static_cast<std::size_t>(std::llround((t - t0) / presence.bin_width));
    if (idx >= presence.times.size()) continue;
    peak = std::max(peak, arrival_density[i]);
    worst = std::max(worst, std::abs(presence.density[idx] - arrival_density[i]));
    s.rows.push_back({t, presence.density[idx], arrival_density[i]});
  }
  r.checks.push_back(at_least("max relative deviation presence vs arrival", worst / peak, num(p, "min_deviation")));
  double total = 0.0;
  for (double d : presence.density) total += d * presence.bin_width;
  r.checks.push_back(within("presence normalization", total, 1.0, 1e-9));
  r.values["presence_mean"] = presence.mean_time();
  r.values["arrival_mean"] = arrival.mean_time();
  r.values["arrival_detected"] = arrival.detected();
  r.series.push_back(std::move(s));
  return r;
}

}  // namespace toa::cli
