#pragma once

#include <Eigen/Dense>

namespace kpzlab {

// Gauss-Legendre rule on [a, b]; weights are positive and sum to b - a.
struct QuadratureRule {
  double a = -1.0;
  double b = 1.0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int order() const { return static_cast<int>(nodes.size()); }
};

// Rule of order q on [-1, 1] (cached; thread-safe).
QuadratureRule gauss_legendre(int q);

// Affine image of gauss_legendre(q) on [a, b].
QuadratureRule gauss_legendre(int q, double a, double b);

// Half-line rule for integrals over (a, +infinity) of superexponentially
// decaying integrands: x = a + scale * (-log(1 - s)), s in (0,1) Gauss nodes.
QuadratureRule half_line_exp(int q, double a, double scale);

}  // namespace kpzlab
