#pragma once

#include <cstddef>
#include <vector>

namespace toa {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t order);

  /// Composite rule: `panels` equal panels on [a, b].
  template <class F>
  auto integrate(F&& f, double a, double b, std::size_t panels) const {
    const double h = (b - a) / static_cast<double>(panels);
    decltype(f(a)) sum{};
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + h * (static_cast<double>(p) + 0.5);
      for (std::size_t i = 0; i < nodes.size(); ++i) sum += f(mid + 0.5 * h * nodes[i]) * (0.5 * h * weights[i]);
    }
    return sum;
  }
};

}  // namespace toa
