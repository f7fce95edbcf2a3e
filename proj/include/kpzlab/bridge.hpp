#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace kpzlab {

// Piecewise-constant barrier: base level plus disjoint rectangular bumps
// raised above it. (This is the shape "-g" takes for the notched ceilings.)
struct Bump {
  double start;
  double width;
  double height;
};

struct Barrier {
  double base_level = 0.0;
  std::vector<Bump> bumps;
};

// Rate-two Brownian bridge between (l1, u1) and (l2, u2).
struct BridgeSpec {
  double l1;
  double l2;
  double u1;
  double u2;
};

// Throws invalid_argument unless bumps are disjoint with positive widths and
// nonnegative heights. Returns the bumps sorted by start.
std::vector<Bump> validated_bumps(const Barrier& b);

// Reflection-principle kernel
//   Theta^{(a)}_{[l1,l2]}(u1,u2) = [p(u2-u1) - p(u1+u2-2a)] 1{u1,u2 > a}.
double theta(double a, const BridgeSpec& spec);

struct ThetaPartials {
  double d_u1;
  double d_u2;
  double d_u1u2;
};

// Closed-form partials of theta in (u1, u2); one-sided limits at the barrier.
ThetaPartials theta_partials(double a, const BridgeSpec& spec);

// Sub-density of the bridge terminating at u2 while staying strictly above
// the barrier everywhere on [l1, l2]. Theta segments composed by quadrature
// over intermediate values; 64- vs 128-node disagreement raises
// numeric_failure.
double nohit_prob(const Barrier& b, const BridgeSpec& spec);

// Matrix of the no-hit kernel on explicit endpoint value grids; used for
// operator assembly. Rows index `left` (values at l1), columns `right`.
Eigen::MatrixXd nohit_kernel_matrix(const Barrier& b, double l1, double l2,
                                    const Eigen::VectorXd& left,
                                    const Eigen::VectorXd& right, int q_inner);

// Taboo transition density from the barrier: started at level a at time z,
// density of sitting at v >= a at time delta having stayed above a,
//   (v-a)/(delta-z) p_{delta-z}(v-a)  ( = -2 p'_{delta-z}(v-a) ).
double hitting_density(double a, double z, double delta, double v);

// Exact-in-law skeleton of the rate-two bridge at spacing grid_step.
std::vector<double> sample_bridge(const BridgeSpec& spec, double grid_step,
                                  std::uint64_t seed);

// Exact sample of the maximum (or minimum) of a rate-two Brownian bridge of
// the given length between values a and b, driven by one uniform variate.
double bridge_cell_extremum(double a, double b, double length, bool maximum,
                            double u01);

}  // namespace kpzlab
