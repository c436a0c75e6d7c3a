#include "toa/quadrature.hpp"

#include <cmath>

#include "toa/error.hpp"
#include "toa/grid.hpp"

namespace toa {

GaussLegendre::GaussLegendre(std::size_t order) : nodes(order), weights(order) {
  if (order == 0 || order > 64) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre order must be 1..64");
  const auto n = static_cast<unsigned>(order);
  for (unsigned i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, x);
      dp = n * (x * p - std::legendre(n - 1, x)) / (x * x - 1.0);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    dp = n * (x * std::legendre(n, x) - std::legendre(n - 1, x)) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace toa
