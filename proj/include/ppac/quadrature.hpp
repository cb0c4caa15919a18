#pragma once

#include <vector>

namespace ppac {

/// Gauss-Legendre rule mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights for `points`-point Gauss-Legendre on [0, 1]. Rules are
/// computed once per point count and cached.
const QuadratureRule& gauss_legendre_unit(int points);

}  // namespace ppac
