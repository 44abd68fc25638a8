#pragma once

#include <vector>

namespace mipdg {

// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n - 1.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }

  static QuadratureRule gauss_legendre(int n);
};

}  // namespace mipdg
