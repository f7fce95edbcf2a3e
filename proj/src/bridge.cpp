#include "kpzlab/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "kpzlab/common.hpp"
#include "kpzlab/quadrature.hpp"
#include "kpzlab/rng.hpp"
#include "kpzlab/specfun.hpp"

namespace kpzlab {

namespace {

void check_spec(const BridgeSpec& spec) {
  if (!std::isfinite(spec.l1) || !std::isfinite(spec.l2) ||
      !std::isfinite(spec.u1) || !std::isfinite(spec.u2)) {
    throw invalid_argument("bridge spec must be finite");
  }
  if (!(spec.l1 < spec.l2)) {
    throw invalid_argument("bridge spec needs l1 < l2");
  }
}

// p'(z) = -z/(2 ell) p(z), p''(z) = (z^2/(4 ell^2) - 1/(2 ell)) p(z).
double heat_d1(double ell, double z) {
  return -z / (2.0 * ell) * heat_kernel(ell, z);
}

double heat_d2(double ell, double z) {
  return (z * z / (4.0 * ell * ell) - 0.5 / ell) * heat_kernel(ell, z);
}

// Segmentation of [l1, l2] by the barrier's breakpoints.
struct Segment {
  double a;
  double b;
  double level;
};

std::vector<Segment> split_segments(const Barrier& barrier, double l1,
                                    double l2) {
  const std::vector<Bump> bumps = validated_bumps(barrier);
  for (const Bump& bump : bumps) {
    if (bump.start < l1 - 1e-12 || bump.start + bump.width > l2 + 1e-12) {
      throw invalid_argument("bump extends outside the bridge interval");
    }
  }
  std::vector<Segment> segs;
  double cursor = l1;
  for (const Bump& bump : bumps) {
    if (bump.height == 0.0) continue;
    const double s = std::max(bump.start, l1);
    const double e = std::min(bump.start + bump.width, l2);
    if (s > cursor + 1e-12) {
      segs.push_back({cursor, s, barrier.base_level});
    }
    segs.push_back({std::max(cursor, s), e, barrier.base_level + bump.height});
    cursor = e;
  }
  if (cursor < l2 - 1e-12) {
    segs.push_back({cursor, l2, barrier.base_level});
  } else if (segs.empty()) {
    segs.push_back({l1, l2, barrier.base_level});
  }
  return segs;
}

double theta_value(double a, double ell, double u1, double u2) {
  if (u1 <= a || u2 <= a) return 0.0;
  return heat_kernel(ell, u2 - u1) - heat_kernel(ell, u1 + u2 - 2.0 * a);
}

Eigen::MatrixXd theta_matrix(double a, double ell, const Eigen::VectorXd& xs,
                             const Eigen::VectorXd& ys) {
  Eigen::MatrixXd out(xs.size(), ys.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    for (Eigen::Index j = 0; j < ys.size(); ++j) {
      out(i, j) = theta_value(a, ell, xs[i], ys[j]);
    }
  }
  return out;
}

Eigen::MatrixXd compose_segments(const std::vector<Segment>& segs,
                                 const Eigen::VectorXd& left,
                                 const Eigen::VectorXd& right, int q_inner) {
  const double span = segs.back().b - segs.front().a;
  const double spread = 12.0 * std::sqrt(span);
  double tallest = left.maxCoeff();
  tallest = std::max(tallest, right.maxCoeff());
  for (const Segment& s : segs) tallest = std::max(tallest, s.level);

  Eigen::MatrixXd acc;  // left x (current junction nodes)
  Eigen::VectorXd nodes = left;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& seg = segs[k];
    const bool last = (k + 1 == segs.size());
    Eigen::VectorXd next_nodes;
    Eigen::VectorXd next_weights;
    if (last) {
      next_nodes = right;
    } else {
      // Junction values must clear both adjacent levels; the window above
      // covers the bridge's spread around the tallest reachable value.
      const double floor_level = std::max(seg.level, segs[k + 1].level);
      const QuadratureRule rule =
          gauss_legendre(q_inner, floor_level, tallest + spread);
      next_nodes = Eigen::Map<const Eigen::VectorXd>(rule.nodes.data(),
                                                     q_inner);
      next_weights = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(),
                                                       q_inner);
    }
    Eigen::MatrixXd block =
        theta_matrix(seg.level, seg.b - seg.a, nodes, next_nodes);
    if (!last) block = block * next_weights.asDiagonal();
    acc = (k == 0) ? block : Eigen::MatrixXd(acc * block);
    nodes = next_nodes;
  }
  return acc;
}

}  // namespace

std::vector<Bump> validated_bumps(const Barrier& b) {
  if (!std::isfinite(b.base_level)) {
    throw invalid_argument("barrier base level must be finite");
  }
  std::vector<Bump> bumps = b.bumps;
  for (const Bump& bump : bumps) {
    if (!std::isfinite(bump.start) || !std::isfinite(bump.width) ||
        !std::isfinite(bump.height)) {
      throw invalid_argument("barrier bump must be finite");
    }
    if (bump.width <= 0.0) throw invalid_argument("bump width must be > 0");
    if (bump.height < 0.0) throw invalid_argument("bump height must be >= 0");
  }
  std::sort(bumps.begin(), bumps.end(),
            [](const Bump& x, const Bump& y) { return x.start < y.start; });
  for (std::size_t i = 1; i < bumps.size(); ++i) {
    if (bumps[i].start < bumps[i - 1].start + bumps[i - 1].width - 1e-12) {
      throw invalid_argument("barrier bumps must be disjoint");
    }
  }
  return bumps;
}

double theta(double a, const BridgeSpec& spec) {
  check_spec(spec);
  if (!std::isfinite(a)) throw invalid_argument("barrier level must be finite");
  return theta_value(a, spec.l2 - spec.l1, spec.u1, spec.u2);
}

ThetaPartials theta_partials(double a, const BridgeSpec& spec) {
  check_spec(spec);
  if (!std::isfinite(a)) throw invalid_argument("barrier level must be finite");
  if (spec.u1 < a || spec.u2 < a) {
    return {0.0, 0.0, 0.0};
  }
  const double ell = spec.l2 - spec.l1;
  const double d = spec.u2 - spec.u1;
  const double s = spec.u1 + spec.u2 - 2.0 * a;
  ThetaPartials out;
  out.d_u1 = -heat_d1(ell, d) - heat_d1(ell, s);
  out.d_u2 = heat_d1(ell, d) - heat_d1(ell, s);
  out.d_u1u2 = -heat_d2(ell, d) - heat_d2(ell, s);
  return out;
}

double nohit_prob(const Barrier& b, const BridgeSpec& spec) {
  check_spec(spec);
  const std::vector<Segment> segs = split_segments(b, spec.l1, spec.l2);
  if (segs.size() == 1) {
    return theta_value(segs[0].level, segs[0].b - segs[0].a, spec.u1, spec.u2);
  }
  if (spec.u1 <= segs.front().level || spec.u2 <= segs.back().level) {
    return 0.0;
  }
  Eigen::VectorXd left(1), right(1);
  left[0] = spec.u1;
  right[0] = spec.u2;
  const double coarse = compose_segments(segs, left, right, 64)(0, 0);
  const double fine = compose_segments(segs, left, right, 128)(0, 0);
  if (std::abs(coarse - fine) > 1e-6) {
    throw numeric_failure("no-hit quadrature did not stabilize");
  }
  return fine;
}

Eigen::MatrixXd nohit_kernel_matrix(const Barrier& b, double l1, double l2,
                                    const Eigen::VectorXd& left,
                                    const Eigen::VectorXd& right,
                                    int q_inner) {
  if (!(l1 < l2)) throw invalid_argument("no-hit kernel needs l1 < l2");
  if (left.size() == 0 || right.size() == 0) {
    throw invalid_argument("no-hit kernel needs endpoint grids");
  }
  if (q_inner < 2) throw invalid_argument("q_inner must be at least 2");
  const std::vector<Segment> segs = split_segments(b, l1, l2);
  return compose_segments(segs, left, right, q_inner);
}

double hitting_density(double a, double z, double delta, double v) {
  if (!std::isfinite(a) || !std::isfinite(z) || !std::isfinite(delta) ||
      !std::isfinite(v)) {
    throw invalid_argument("hitting density arguments must be finite");
  }
  if (!(z < delta)) throw invalid_argument("hitting density needs z < delta");
  if (v < a) throw invalid_argument("hitting density needs v >= a");
  const double ell = delta - z;
  return (v - a) / ell * heat_kernel(ell, v - a);
}

std::vector<double> sample_bridge(const BridgeSpec& spec, double grid_step,
                                  std::uint64_t seed) {
  check_spec(spec);
  if (!(grid_step > 0.0)) throw invalid_argument("grid step must be > 0");
  const double span = spec.l2 - spec.l1;
  const double n_real = span / grid_step;
  const auto n = static_cast<std::size_t>(std::llround(n_real));
  if (n < 1 || std::abs(n_real - static_cast<double>(n)) > 1e-9 * n_real) {
    throw invalid_argument("grid step must divide the bridge interval");
  }
  Rng rng(seed);
  std::vector<double> path(n + 1);
  path[0] = spec.u1;
  path[n] = spec.u2;
  for (std::size_t i = 1; i < n; ++i) {
    const double remaining = span - static_cast<double>(i - 1) * grid_step;
    const double mean =
        path[i - 1] + (spec.u2 - path[i - 1]) * grid_step / remaining;
    const double var =
        2.0 * grid_step * (remaining - grid_step) / remaining;
    path[i] = mean + std::sqrt(var) * rng.normal();
  }
  return path;
}

double bridge_cell_extremum(double a, double b, double length, bool maximum,
                            double u01) {
  if (!(length > 0.0)) throw invalid_argument("cell length must be > 0");
  if (!(u01 > 0.0) || !(u01 < 1.0)) {
    throw invalid_argument("uniform variate must lie in (0,1)");
  }
  const double gap = a - b;
  const double root = std::sqrt(gap * gap - 4.0 * length * std::log(u01));
  return maximum ? 0.5 * (a + b + root) : 0.5 * (a + b - root);
}

}  // namespace kpzlab
