#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace kpzlab {

// Row-major so that a line f_j is contiguous.
using LineMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Provenance { brownian, deterministic };

// n lines sampled on the uniform grid {0, step, ..., x_max}. Row j-1 holds
// f_j; line 1 is the top line, line n the bottom.
struct Environment {
  int n = 0;
  double grid_step = 0.0;
  double x_max = 0.0;
  LineMatrix values;
  Provenance provenance = Provenance::deterministic;
  double rate = 2.0;
  double drift = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index m() const { return values.cols(); }
  double x_at(Eigen::Index i) const { return static_cast<double>(i) * grid_step; }
  // Grid index of x; off-grid points (beyond float slack) throw.
  Eigen::Index index_of(double x) const;
};

Environment sample_environment(int n, double grid_step, double x_max,
                               double rate, double drift, std::uint64_t seed);

// Last passage value from (y, from_line) to (x, to_line) with jump times on
// the grid. Returns -infinity when y > x.
double lpp_value(const Environment& env, double y, double x,
                 int from_line = 0, int to_line = 1);

// One DP sweep: best values from (grid[start_index], from_line) to every
// grid point on to_line. Entries before start_index are -infinity.
Eigen::VectorXd lpp_profile(const Environment& env, Eigen::Index start_index,
                            int from_line, int to_line);

// Exact maximum total weight of j paths from (0, n) to (x, 1) sharing no
// line segment of positive length. Exhaustive over occupancy subsets; small
// instances only.
double lpp_disjoint(const Environment& env, int j, double x);

// Two-line melon step: new_top is the pair LPP value profile, new_bottom
// keeps the pointwise sum. Both lines must vanish at the origin.
std::pair<std::vector<double>, std::vector<double>> pitman_pair(
    const std::vector<double>& top, const std::vector<double>& bottom);

struct MelonEnsemble {
  Environment env;  // values row j-1 = (Wf)_j, ordered top to bottom

  const Environment& as_environment() const { return env; }
  // Scaled curve L_{n,j}(x) read at the grid point nearest n + 2 x n^{2/3};
  // the centering uses the snapped abscissa so cross-checks are exact.
  double scaled_value(int j, double x) const;
  // The snapped abscissa itself.
  double snapped_abscissa(double x) const;
};

MelonEnsemble melon(const Environment& env);

// First two melon curves on the full grid without sorting the ensemble:
// row 0 is (Wf)_1, row 1 is (Wf)_2, from forward DPs over single paths and
// disjoint path pairs. Cost O(n^2 m), so usable at experiment sizes.
Eigen::MatrixXd melon_top_two(const Environment& env);

struct IdentitySample {
  double y;
  double x;
  double direct;
  double melon;
  double diff;
};

std::vector<IdentitySample> melon_identity_report(
    const Environment& env, const std::vector<std::pair<double, double>>& samples);

}  // namespace kpzlab
