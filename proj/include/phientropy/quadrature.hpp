#pragma once

#include <vector>

namespace phientropy {

/// Gauss-Legendre rule transplanted to [0, 1]; weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rules are cached per node count; the returned reference stays valid.
const QuadratureRule& gauss_legendre_unit(int n);

}  // namespace phientropy
