#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "kpzlab/kpzsim.hpp"
#include "kpzlab/lpp.hpp"
#include "kpzlab/rng.hpp"

namespace kpzlab {

// Top two melon curves in scaled coordinates on the uniform grid
// x_k = x_lo + k dx inherited from the environment. These two curves carry
// everything the single-point resampling needs: the best environment weight
// from the origin into (x, line 2) equals second(x), so the origin-wedge
// height over a (possibly modified) pair is
//   h(x_k) = top(x_k) + max(0, max_{j <= k} (second - top)(x_j)).
struct CurvePair {
  int n = 0;
  double x_lo = 0.0;
  double dx = 0.0;
  Eigen::VectorXd top;
  Eigen::VectorXd second;

  Eigen::Index size() const { return top.size(); }
  double x_at(Eigen::Index k) const {
    return x_lo + static_cast<double>(k) * dx;
  }
  Eigen::Index index_near(double x) const;
};

CurvePair scaled_top_two(const Environment& env);

struct MaxInfo {
  double x0 = 0.0;
  double value = 0.0;
  Eigen::Index index = 0;
};

// Largest maximizer of the top curve over the grid part of [-x_cap, x_cap].
MaxInfo largest_maximizer(const CurvePair& curves, double x_cap);

// Data held fixed while the single value Z = top(x0 + A + 1) is resampled:
// window columns, side bridges, the unconstrained conditional law (mu,
// sigma), and the feasibility corners. Window endpoints snap to the grid,
// so sigma is 1 only up to O(dx).
struct ResampleState {
  double x0 = 0.0;
  double A = 0.0;
  Eigen::Index ix0 = 0;
  Eigen::Index ia = 0;  // column of x0 + A
  Eigen::Index im = 0;  // column of x0 + A + 1, the resampled abscissa
  Eigen::Index ib = 0;  // column of x0 + A + 2
  double z_original = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
  Eigen::VectorXd bridge_lo;  // top minus chord on [ia, im]
  Eigen::VectorXd bridge_hi;  // top minus chord on [im, ib]
  // Feasible interval of z: curves stay ordered on the window and the
  // wedge profile stays <= h(x0) strictly right of x0. Always contains
  // z_original; boundaries located by bisection to width 1e-8.
  double corner_lo = 0.0;
  double corner_hi = 0.0;
};

ResampleState make_resample_state(const CurvePair& curves, double x0,
                                  double A);

// Top curve with top(x0 + A + 1) moved to z and the side bridges kept:
// top_z(x_k) = top(x_k) + w_k (z - z_original), w_k the chord weight of the
// midpoint at x_k. Exactly the input at z = z_original, and the window
// endpoints never move.
CurvePair reconstruct(const CurvePair& curves, const ResampleState& st,
                      double z);

// Origin-wedge height profile over the pair (works on reconstructed pairs).
// Only Kind::narrow_wedge with u = 0 is supported here; the experiments
// below never need another initial condition.
SpatialProfile reconstructed_profile(const CurvePair& curves,
                                     const InitialData& h0);

struct ZSample {
  double z = 0.0;
  bool degenerate = false;  // corner gap below 1e-12; z pinned to corner_hi
};

// N(mu, sigma^2) truncated to [corner_lo, corner_hi] by inverse CDF.
ZSample sample_Z(const ResampleState& st, Rng& rng);

// Replaces top strictly inside [a, b] by a rate-2 bridge between the kept
// endpoint values, rejection-conditioned to stay above the second curve at
// every interior grid point. Throws acceptance_too_low after 1e5 rejects.
CurvePair gibbs_bridge_resample(const CurvePair& curves, double a, double b,
                                Rng& rng);

struct EpsRow {
  double eps = 0.0;
  int hits = 0;
  double freq = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

struct LowerBoundReport {
  int replicas = 0;
  int fav_hits = 0;
  double fav_freq = 0.0;
  // Level windows are centred on the run median of h(x0): the prelimit grid
  // shifts all heights by a common n-dependent amount, which the centred
  // windows remove while leaving every height difference untouched.
  double level_center = 0.0;
  double slope = 0.0;  // log-log slope of freq against eps; NaN if < 2 points
  std::vector<EpsRow> rows;
};

// Near-deficit frequency under one conditional resample of Z per replica.
// A replica scores for eps when sup over [x0+A, x0+A+2] of the resampled
// wedge profile exceeds h(x0) - eps and the maximizer windows
// |h(x0) - center| <= beta sqrt(L), |x0| <= beta L - A - 2 hold. fav_freq
// counts corner_hi <= center + 4K, |mu - center| <= K plus the same two
// windows. Wilson 95% intervals per row.
LowerBoundReport lower_bound_experiment(int n, const InitialData& h0,
                                        double A, double K, double L,
                                        const std::vector<double>& eps_list,
                                        int replicas, std::uint64_t seed,
                                        double beta = 0.5,
                                        double grid_step = 0.25);

}  // namespace kpzlab
