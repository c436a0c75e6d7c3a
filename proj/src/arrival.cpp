#include "toa/arrival.hpp"

#include <algorithm>
#include <numeric>

namespace toa {

double ArrivalSeries::detected() const { return std::accumulate(probabilities.begin(), probabilities.end(), 0.0); }

std::vector<double> ArrivalSeries::conditional() const {
  const double total = detected();
  std::vector<double> out(probabilities);
  if (total > 0.0)
    for (auto& p : out) p /= total;
  return out;
}

double ArrivalSeries::mean_time() const {
  double s = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) s += times[i] * probabilities[i];
  const double total = detected();
  return total > 0.0 ? s / total : 0.0;
}

double ArrivalSeries::weight_between(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= lo && times[i] < hi) s += probabilities[i];
  return s;
}

std::size_t ArrivalSeries::peak_index() const {
  if (probabilities.empty()) return 0;
  return static_cast<std::size_t>(std::max_element(probabilities.begin(), probabilities.end()) - probabilities.begin());
}

}  // namespace toa
