#pragma once

#include <Eigen/Dense>

#include "kpzlab/bridge.hpp"
#include "kpzlab/kpzsim.hpp"
#include "kpzlab/quadrature.hpp"

namespace kpzlab {

// Kernel sampled on a quadrature rule, stored as W^{1/2} K W^{1/2} so that
// det(I + matrix) is the Nystrom approximation of det(I + K) on the rule's
// interval.
struct DiscretizedKernel {
  QuadratureRule rule;
  Eigen::MatrixXd matrix;
};

// det(I + k.matrix) by pivoted LU. Size mismatch against the rule or a
// non-finite entry raises invalid_argument.
double fredholm_det(const DiscretizedKernel& k);

// Tracy-Widom GUE distribution function: det(I - K_Ai) on (m, infinity),
// assembled on q and 2q exponentially mapped nodes. q < 20 raises
// invalid_argument; a q-vs-2q disagreement above 1e-6 raises numeric_failure.
double tw_gue_cdf(double m, int q = 40);

// Discretized product kernel whose Fredholm determinant is the probability
// that the height at time t stays at or below the piecewise-constant ceiling
// g throughout [-L, L]. fredholm_det of the result IS that probability (the
// matrix holds the negated kernel).
//
// h0 must be a narrow wedge with |u| < L; the product representation used
// here flows both group factors forward only for one-point initial data.
// neg_g encodes -g as a Barrier: base_level = -M for ceiling level M, and a
// bump of height eps on [x, x + delta) cuts the ceiling to M - eps there.
// At most two bumps. base_level = -infinity (no bumps) means no ceiling and
// yields the zero kernel. kappa is the cubic weight rate that makes the
// factored operators trace class; it cancels in the assembled product, but
// kappa >= 2/3 breaks the underlying bound and raises too_large.
DiscretizedKernel build_fixed_point_operators(const InitialData& h0,
                                              const Barrier& neg_g, double t,
                                              double L, double kappa, int q);

// Depth and width of one rectangular dip cut into the ceiling.
struct NotchSize {
  double eps = 0.0;    // depth
  double delta = 0.0;  // width
};

// P(height stays <= M on [-L, L] and rises above M - eps_i somewhere in
// [x_i, x_i + delta_i) for BOTH i), by inclusion-exclusion over the four
// notched-ceiling determinants. Zero depth or width gives exactly 0. A value
// below -1e-8 raises numeric_failure.
double twin_peaks_prob_det(const NotchSize& eta1, const NotchSize& eta2,
                           double x1, double x2, double M, double L,
                           const InitialData& h0, int q, double t = 1.0);

// Joint density of near-ceiling visits at x1 and x2, normalized per unit
// eps_i * delta_i in the small-notch limit; includes the short-distance
// factor (4 pi)^{-1/2} (x2 - x1)^{-3/2}. Computed from the flat-ceiling
// resolvent and the two boundary-pin vectors, so no determinant differencing
// is involved.
double density_F(double x1, double x2, double M, double L,
                 const InitialData& h0, int q, double t = 1.0);

}  // namespace kpzlab
