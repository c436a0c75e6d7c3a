#pragma once

#include <vector>

namespace toa {

/// Discrete arrival record: probability per time bin plus the probability that
/// the particle was never recorded.
struct ArrivalSeries {
  std::vector<double> times;
  std::vector<double> probabilities;
  double residual = 0.0;
  double bin_width = 0.0;

  double detected() const;
  /// Probabilities renormalized to the detected fraction.
  std::vector<double> conditional() const;
  double mean_time() const;
  /// Total probability in bins with lo <= t < hi.
  double weight_between(double lo, double hi) const;
  std::size_t peak_index() const;
};

}  // namespace toa
