#include "common.hpp"

#include <cmath>

#include "toa/error.hpp"

namespace toa::cli {

double num(const Json& j, const char* key) { return j.at(key).get<double>(); }

std::size_t count(const Json& j, const char* key) { return j.at(key).get<std::size_t>(); }

std::vector<double> numbers(const Json& j, const char* key) { return j.at(key).get<std::vector<double>>(); }

Grid1D grid_from(const Json& j) { return Grid1D(num(j, "x_min"), num(j, "x_max"), count(j, "n")); }

GaussianSpec packet_from(const Json& j, double mass) {
  return {num(j, "x0"), num(j, "k0"), num(j, "sigma"), mass};
}

EvolutionParams evolution_from(const Json& j, const Grid1D& grid, double mass) {
  EvolutionParams ep;
  ep.mass = mass;
  ep.dt = num(j, "courant") / grid.e_max(mass);
  const double duration = num(j, "duration");
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidArgument, "evolution.duration must be positive");
  ep.n_steps = static_cast<std::size_t>(std::ceil(duration / ep.dt - 1e-9));
  ep.validate(grid);
  return ep;
}

WaveFunction two_gaussian(const Grid1D& grid, const GaussianSpec& a, const GaussianSpec& b) {
  WaveFunction psi = make_gaussian(grid, a);
  psi += make_gaussian(grid, b);
  const double n2 = psi.norm2();
  if (!(n2 > 0.0)) throw Error(ErrorKind::ZeroNorm, "packets cancel");
  psi *= 1.0 / std::sqrt(n2);
  return psi;
}

bool monotone_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

double refined_peak(const ArrivalSeries& s) {
  const std::size_t i = s.peak_index();
  if (i == 0 || i + 1 >= s.times.size()) return s.times[i];
  const double a = s.probabilities[i - 1];
  const double b = s.probabilities[i];
  const double c = s.probabilities[i + 1];
  const double curvature = a - 2.0 * b + c;
  if (!(curvature < 0.0)) return s.times[i];
  return s.times[i] + 0.5 * (a - c) / curvature * (s.times[i + 1] - s.times[i]);
}

}  // namespace toa::cli
