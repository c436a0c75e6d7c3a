#pragma once

// Shared parameter plumbing for the experiment implementations.

#include <cstddef>
#include <vector>

#include "experiments.hpp"
#include "toa/error.hpp"
#include "toa/arrival.hpp"
#include "toa/grid.hpp"
#include "toa/propagator.hpp"

namespace toa::cli {

double num(const Json& j, const char* key);
std::size_t count(const Json& j, const char* key);
std::vector<double> numbers(const Json& j, const char* key);

/// {"x_min", "x_max", "n"}
Grid1D grid_from(const Json& j);
/// {"x0", "k0", "sigma"} plus the mass
GaussianSpec packet_from(const Json& j, double mass);
/// {"courant", "duration"}: dt = courant / E_max, steps to cover duration.
EvolutionParams evolution_from(const Json& j, const Grid1D& grid, double mass);

/// Two equal-weight Gaussians sharing x0 and sigma, normalized on the grid.
WaveFunction two_gaussian(const Grid1D& grid, const GaussianSpec& a, const GaussianSpec& b);

bool monotone_decreasing(const std::vector<double>& v);

/// Peak time of a binned series refined by a parabola through the top three bins.
double refined_peak(const ArrivalSeries& s);

}  // namespace toa::cli
