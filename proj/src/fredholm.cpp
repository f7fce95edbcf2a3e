#include "kpzlab/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kpzlab/common.hpp"
#include "kpzlab/specfun.hpp"

namespace kpzlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Node counts for the notch contractions. The pin integrals are smooth after
// the square-root time substitution, so modest fixed sizes reach well below
// the outer-rule error.
constexpr int kAtomNodes = 16;
constexpr int kXiNodes = 20;
constexpr int kYNodes = 32;
constexpr double kYReach = 12.0;

// d/dz of s_kernel(t, x, z) for t > 0, combined in log space the same way.
double s_deriv_z(double t, double x, double z) {
  if (!(t > 0.0) || !std::isfinite(x) || !std::isfinite(z)) {
    throw invalid_argument("s_deriv_z: needs t > 0 and finite arguments");
  }
  const double t13 = std::cbrt(t);
  const double arg = -z / t13 + x * x / (t13 * t);
  const AiryValue a = airy(arg);
  const double inner = -(x / t) * a.ai - a.ai_prime / t13;
  if (inner == 0.0) return 0.0;
  const double log_pref = 2.0 * x * x * x / (3.0 * t * t) - z * x / t;
  return std::copysign(std::exp(log_pref + std::log(std::abs(inner))), inner) /
         t13;
}

// Flat-ceiling context for one narrow wedge at u, ceiling level M, window
// [-L, L], observation time t. The product kernel factors through a
// half-line integral; everything below lives on that (0, infinity) frame,
// where each factor sits on the decaying side of the Airy function. `sl` and
// `sr` carry the two wedge factors sampled against the ceiling-side nodes,
// `base` is the flat-ceiling kernel: a reflected-Airy closed term minus the
// two single-sided ceiling corrections plus the double-sided one.
struct WedgeContext {
  double t = 1.0;
  double L = 0.0;
  double u = 0.0;
  double M = 0.0;
  double a1 = 0.0;  // u - L
  double a2 = 0.0;  // -L - u
  QuadratureRule lam;    // outer nodes on (0, infinity)
  QuadratureRule bq;     // ceiling-side nodes on (M, infinity)
  Eigen::MatrixXd sl;    // q x qb, s_kernel(t, a2, -lam_i - b_k)
  Eigen::MatrixXd sr;    // q x qb, s_kernel(t, a1, -lam_j - b_k)
  Eigen::MatrixXd base;  // q x q
};

double outer_scale(double t, double M) {
  const double reach = 14.0 * std::cbrt(2.0 * t) + std::max(0.0, -2.0 * M) + 2.0;
  return reach / 9.0;
}

WedgeContext make_wedge_context(double t, double L, double u, double M,
                                int q) {
  WedgeContext c;
  c.t = t;
  c.L = L;
  c.u = u;
  c.M = M;
  c.a1 = u - L;
  c.a2 = -L - u;
  c.lam = half_line_exp(q, 0.0, outer_scale(t, M));
  c.bq = half_line_exp(q, M, 1.8 * t / (L - std::abs(u)));

  const int qb = c.bq.order();
  c.sl.resize(q, qb);
  c.sr.resize(q, qb);
  Eigen::MatrixXd v1(qb, q);  // ceiling bracket against the right factor
  Eigen::MatrixXd v2(qb, q);  // ceiling bracket against the left factor
  for (int k = 0; k < qb; ++k) {
    const double b = c.bq.nodes[k];
    for (int i = 0; i < q; ++i) {
      const double lam = c.lam.nodes[i];
      c.sl(i, k) = s_kernel(t, c.a2, -lam - b);
      c.sr(i, k) = s_kernel(t, c.a1, -lam - b);
      v1(k, i) = s_kernel(t, u + L, b - 2.0 * M - lam) -
                 s_kernel(t, u + L, -b - lam);
      v2(k, i) = s_kernel(t, L - u, b - 2.0 * M - lam) -
                 s_kernel(t, L - u, -b - lam);
    }
  }
  Eigen::MatrixXd dp(qb, qb);
  for (int k = 0; k < qb; ++k) {
    for (int l = 0; l < qb; ++l) {
      const double b = c.bq.nodes[k];
      const double cc = c.bq.nodes[l];
      dp(k, l) = heat_kernel(2.0 * L, b + cc - 2.0 * M) -
                 heat_kernel(2.0 * L, cc - b);
    }
  }
  Eigen::MatrixXd term1(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      term1(i, j) =
          s_kernel(2.0 * t, 0.0, -(2.0 * M + c.lam.nodes[i] + c.lam.nodes[j]));
    }
  }
  const auto wb = c.bq.weights.asDiagonal();
  c.base = term1 - c.sl * wb * v1 - v2.transpose() * wb * c.sr.transpose() +
           c.sl * wb * dp * wb * c.sr.transpose();
  return c;
}

// Left segment [-L, s] of the ceiling frame contracted against the outer
// nodes: out(i, n) = integral over b of sl-factor times the stay-below
// kernel ending at height v_n. Closed form for the unrestricted heat flow
// minus the explicit b > M correction.
Eigen::MatrixXd left_contraction(const WedgeContext& c, double s,
                                 const Eigen::VectorXd& v) {
  const double ell = s + c.L;
  const double xk = s - c.u;  // a2 + ell
  const int q = c.lam.order();
  const int qb = c.bq.order();
  const int nv = static_cast<int>(v.size());
  Eigen::MatrixXd out(q, nv);
  for (int i = 0; i < q; ++i) {
    const double lam = c.lam.nodes[i];
    for (int n = 0; n < nv; ++n) {
      out(i, n) = s_kernel(c.t, xk, -lam - v[n]) -
                  s_kernel(c.t, xk, v[n] - 2.0 * c.M - lam);
    }
  }
  Eigen::MatrixXd pb(qb, nv);
  for (int k = 0; k < qb; ++k) {
    const double b = c.bq.nodes[k];
    for (int n = 0; n < nv; ++n) {
      pb(k, n) = heat_kernel(ell, v[n] - b) -
                 heat_kernel(ell, b + v[n] - 2.0 * c.M);
    }
  }
  out.noalias() -= c.sl * c.bq.weights.asDiagonal() * pb;
  return out;
}

// Right segment [s, L], same construction against the other factor.
Eigen::MatrixXd right_contraction(const WedgeContext& c, double s,
                                  const Eigen::VectorXd& v) {
  const double ell = c.L - s;
  const double xk = c.u - s;  // a1 + ell
  const int q = c.lam.order();
  const int qb = c.bq.order();
  const int nv = static_cast<int>(v.size());
  Eigen::MatrixXd out(q, nv);
  for (int j = 0; j < q; ++j) {
    const double mu = c.lam.nodes[j];
    for (int n = 0; n < nv; ++n) {
      out(j, n) = s_kernel(c.t, xk, -mu - v[n]) -
                  s_kernel(c.t, xk, v[n] - 2.0 * c.M - mu);
    }
  }
  Eigen::MatrixXd pb(qb, nv);
  for (int l = 0; l < qb; ++l) {
    const double cc = c.bq.nodes[l];
    for (int n = 0; n < nv; ++n) {
      pb(l, n) = heat_kernel(ell, cc - v[n]) -
                 heat_kernel(ell, cc + v[n] - 2.0 * c.M);
    }
  }
  out.noalias() -= c.sr * c.bq.weights.asDiagonal() * pb;
  return out;
}

// Right segment at one fixed height, one column per junction time.
Eigen::MatrixXd right_contraction_at(const WedgeContext& c, double value,
                                     const Eigen::VectorXd& times) {
  const int q = c.lam.order();
  const int qb = c.bq.order();
  const int nt = static_cast<int>(times.size());
  Eigen::MatrixXd out(q, nt);
  for (int j = 0; j < q; ++j) {
    const double mu = c.lam.nodes[j];
    for (int m = 0; m < nt; ++m) {
      const double xk = c.u - times[m];
      out(j, m) = s_kernel(c.t, xk, -mu - value) -
                  s_kernel(c.t, xk, value - 2.0 * c.M - mu);
    }
  }
  Eigen::MatrixXd pb(qb, nt);
  for (int l = 0; l < qb; ++l) {
    const double cc = c.bq.nodes[l];
    for (int m = 0; m < nt; ++m) {
      const double ell = c.L - times[m];
      pb(l, m) = heat_kernel(ell, cc - value) -
                 heat_kernel(ell, cc + value - 2.0 * c.M);
    }
  }
  out.noalias() -= c.sr * c.bq.weights.asDiagonal() * pb;
  return out;
}

// One notch in ceiling-frame coordinates: window [sigma, sigma + delta),
// floor at M - eps.
struct CeilingNotch {
  double sigma = 0.0;
  double delta = 0.0;
  double eps = 0.0;
};

// Shared grids for one notch's first-touch decomposition. The touch either
// happens at the window's opening time with the path inside [M - eps, M]
// (atom part) or at the first later instant the path climbs back to M - eps
// (continuous part). The continuous part substitutes tau = sigma + xi^2 and
// scales the pre-touch height grid with xi, which removes the square-root
// singularity and keeps every integrand smooth uniformly down to xi = 0.
struct NotchGrids {
  QuadratureRule va;   // atom heights in [M - eps, M]
  QuadratureRule xi;   // sqrt of time-into-window, [0, sqrt(delta)]
  QuadratureRule yh;   // scaled depth below the pin level
  Eigen::VectorXd ywt;        // yh weights times y exp(-y^2/4)
  Eigen::VectorXd times;      // sigma + xi^2
  Eigen::VectorXd vall;       // pin - xi_m * y_r, column-major in (m, r)
  Eigen::VectorXd xi_factor;  // 2 w_xi / sqrt(4 pi)
};

NotchGrids make_notch_grids(const CeilingNotch& n, double M) {
  NotchGrids g;
  const double pin = M - n.eps;
  g.va = gauss_legendre(kAtomNodes, pin, M);
  g.xi = gauss_legendre(kXiNodes, 0.0, std::sqrt(n.delta));
  g.yh = gauss_legendre(kYNodes, 0.0, kYReach);
  g.ywt.resize(kYNodes);
  for (int r = 0; r < kYNodes; ++r) {
    const double y = g.yh.nodes[r];
    g.ywt[r] = g.yh.weights[r] * y * std::exp(-0.25 * y * y);
  }
  g.times.resize(kXiNodes);
  g.vall.resize(kXiNodes * kYNodes);
  g.xi_factor.resize(kXiNodes);
  for (int m = 0; m < kXiNodes; ++m) {
    const double xi = g.xi.nodes[m];
    g.times[m] = n.sigma + xi * xi;
    g.xi_factor[m] = 2.0 * g.xi.weights[m] / std::sqrt(4.0 * kPi);
    for (int r = 0; r < kYNodes; ++r) {
      g.vall[m * kYNodes + r] = pin - xi * g.yh.nodes[r];
    }
  }
  return g;
}

// Correction kernel for a single notch: the stay-below kernel gains the
// paths that enter the notch, split by their first touch as above.
Eigen::MatrixXd single_notch_correction(const WedgeContext& c,
                                        const CeilingNotch& n) {
  const int q = c.lam.order();
  const NotchGrids g = make_notch_grids(n, c.M);

  const Eigen::MatrixXd wla = left_contraction(c, n.sigma, g.va.nodes);
  const Eigen::MatrixXd zra = right_contraction(c, n.sigma, g.va.nodes);
  Eigen::MatrixXd out = wla * g.va.weights.asDiagonal() * zra.transpose();

  const Eigen::MatrixXd wlt = left_contraction(c, n.sigma, g.vall);
  Eigen::MatrixXd hw(q, kXiNodes);
  for (int m = 0; m < kXiNodes; ++m) {
    hw.col(m) = wlt.middleCols(m * kYNodes, kYNodes) * g.ywt;
  }
  const Eigen::MatrixXd zrt = right_contraction_at(c, c.M - n.eps, g.times);
  out.noalias() += hw * g.xi_factor.asDiagonal() * zrt.transpose();
  return out;
}

// Stay-below kernel of the flat-ceiling segment between two junction
// points, as a reflection difference.
double ceiling_theta(double M, double l1, double l2, double v1, double v2) {
  return theta(-M, BridgeSpec{l1, l2, -v1, -v2});
}

// Joint correction for two notches, first.sigma < second.sigma. The path is
// pinned at its first touch inside each window; between the two pins the
// flat ceiling kernel bridges the gap.
Eigen::MatrixXd pair_correction(const WedgeContext& c,
                                const CeilingNotch& first,
                                const CeilingNotch& second) {
  const int q = c.lam.order();
  const double pin1 = c.M - second.eps;
  const NotchGrids g1 = make_notch_grids(second, c.M);
  const Eigen::MatrixXd zra1 = right_contraction(c, second.sigma, g1.va.nodes);
  const Eigen::MatrixXd zrt1 = right_contraction_at(c, pin1, g1.times);

  // Hand-off from a pin at (s, vhat) into the second window's machinery.
  const auto yr = [&](double vhat, double s) -> Eigen::VectorXd {
    Eigen::VectorXd th(kAtomNodes);
    for (int n = 0; n < kAtomNodes; ++n) {
      th[n] = g1.va.weights[n] *
              ceiling_theta(c.M, s, second.sigma, vhat, g1.va.nodes[n]);
    }
    Eigen::VectorXd out = zra1 * th;
    Eigen::VectorXd fac(kXiNodes);
    for (int m = 0; m < kXiNodes; ++m) {
      double acc = 0.0;
      for (int r = 0; r < kYNodes; ++r) {
        acc += g1.ywt[r] * ceiling_theta(c.M, s, second.sigma, vhat,
                                         g1.vall[m * kYNodes + r]);
      }
      fac[m] = g1.xi_factor[m] * acc;
    }
    out.noalias() += zrt1 * fac;
    return out;
  };

  const NotchGrids g2 = make_notch_grids(first, c.M);
  const Eigen::MatrixXd wla2 = left_contraction(c, first.sigma, g2.va.nodes);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q, q);
  for (int n = 0; n < kAtomNodes; ++n) {
    out.noalias() += (g2.va.weights[n] * wla2.col(n)) *
                     yr(g2.va.nodes[n], first.sigma).transpose();
  }
  const Eigen::MatrixXd wlt2 = left_contraction(c, first.sigma, g2.vall);
  const double pin2 = c.M - first.eps;
  for (int m = 0; m < kXiNodes; ++m) {
    const Eigen::VectorXd hw = wlt2.middleCols(m * kYNodes, kYNodes) * g2.ywt;
    out.noalias() +=
        (g2.xi_factor[m] * hw) * yr(pin2, g2.times[m]).transpose();
  }
  return out;
}

// Boundary-pin vectors: the small-notch limit of a notch correction at x is
// the rank-one kernel wbar_x zbar_x^T per unit notch area. The unrestricted
// part closes into the z-derivative of the group kernel; the ceiling-side
// correction stays explicit.
Eigen::VectorXd left_pin_vector(const WedgeContext& c, double x) {
  const double ell = x + c.L;
  const double xk = x - c.u;  // a2 + ell
  const int q = c.lam.order();
  const int qb = c.bq.order();
  Eigen::VectorXd drop(qb);
  for (int k = 0; k < qb; ++k) {
    const double b = c.bq.nodes[k];
    drop[k] =
        c.bq.weights[k] * (c.M - b) / ell * heat_kernel(ell, c.M - b);
  }
  Eigen::VectorXd out(q);
  for (int i = 0; i < q; ++i) {
    out[i] = 2.0 * s_deriv_z(c.t, xk, -c.lam.nodes[i] - c.M);
  }
  out.noalias() -= c.sl * drop;
  return out;
}

Eigen::VectorXd right_pin_vector(const WedgeContext& c, double x) {
  const double ell = c.L - x;
  const double xk = c.u - x;  // a1 + ell
  const int q = c.lam.order();
  const int qb = c.bq.order();
  Eigen::VectorXd drop(qb);
  for (int l = 0; l < qb; ++l) {
    const double cc = c.bq.nodes[l];
    drop[l] =
        c.bq.weights[l] * (c.M - cc) / ell * heat_kernel(ell, c.M - cc);
  }
  Eigen::VectorXd out(q);
  for (int j = 0; j < q; ++j) {
    out[j] = 2.0 * s_deriv_z(c.t, xk, -c.lam.nodes[j] - c.M);
  }
  out.noalias() -= c.sr * drop;
  return out;
}

DiscretizedKernel wrap_negated(const QuadratureRule& rule,
                               const Eigen::MatrixXd& kernel) {
  const Eigen::VectorXd sw = rule.weights.array().sqrt();
  DiscretizedKernel out;
  out.rule = rule;
  out.matrix = -(sw.asDiagonal() * kernel * sw.asDiagonal());
  return out;
}

double det_one_minus(const QuadratureRule& rule,
                     const Eigen::MatrixXd& kernel) {
  const Eigen::VectorXd sw = rule.weights.array().sqrt();
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(kernel.rows(), kernel.cols()) -
      sw.asDiagonal() * kernel * sw.asDiagonal();
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

void require_narrow_wedge_inside(const InitialData& h0, double L) {
  validate_initial_data(h0);
  if (h0.kind != InitialData::Kind::narrow_wedge) {
    throw invalid_argument(
        "fredholm: only narrow-wedge initial data has the one-point product "
        "form used here");
  }
  if (!(std::abs(h0.u) < L)) {
    throw invalid_argument("fredholm: wedge position must lie inside [-L, L]");
  }
}

void require_window(double t, double L, double M, int q) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw invalid_argument("fredholm: t must be positive and finite");
  }
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw invalid_argument("fredholm: L must be positive and finite");
  }
  if (!std::isfinite(M)) {
    throw invalid_argument("fredholm: ceiling level must be finite");
  }
  if (q < 20) {
    throw invalid_argument("fredholm: need at least 20 outer nodes");
  }
}

CeilingNotch notch_at(double x, double delta, double eps) {
  return CeilingNotch{x, delta, eps};
}

}  // namespace

double fredholm_det(const DiscretizedKernel& k) {
  const int n = k.rule.order();
  if (k.matrix.rows() != n || k.matrix.cols() != n) {
    throw invalid_argument("fredholm_det: matrix does not match the rule");
  }
  if (!k.matrix.allFinite()) {
    throw invalid_argument("fredholm_det: matrix has non-finite entries");
  }
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(n, n) + k.matrix;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

namespace {

double tw_det_once(double m, int q) {
  const QuadratureRule rule = half_line_exp(q, m, 1.5);
  Eigen::VectorXd ai(q), aip(q);
  for (int i = 0; i < q; ++i) {
    const AiryValue a = airy(rule.nodes[i]);
    ai[i] = a.ai;
    aip[i] = a.ai_prime;
  }
  Eigen::MatrixXd kern(q, q);
  for (int i = 0; i < q; ++i) {
    const double x = rule.nodes[i];
    kern(i, i) = aip[i] * aip[i] - x * ai[i] * ai[i];
    for (int j = i + 1; j < q; ++j) {
      const double y = rule.nodes[j];
      const double val = (ai[i] * aip[j] - aip[i] * ai[j]) / (x - y);
      kern(i, j) = val;
      kern(j, i) = val;
    }
  }
  return det_one_minus(rule, kern);
}

}  // namespace

double tw_gue_cdf(double m, int q) {
  if (!std::isfinite(m)) {
    throw invalid_argument("tw_gue_cdf: m must be finite");
  }
  if (q < 20) {
    throw invalid_argument("tw_gue_cdf: need at least 20 nodes");
  }
  const double coarse = tw_det_once(m, q);
  const double fine = tw_det_once(m, 2 * q);
  if (std::abs(coarse - fine) > 1e-6) {
    throw numeric_failure("tw_gue_cdf: quadrature refinement disagrees");
  }
  return fine;
}

DiscretizedKernel build_fixed_point_operators(const InitialData& h0,
                                              const Barrier& neg_g, double t,
                                              double L, double kappa, int q) {
  require_window(t, L, 0.0, q);
  require_narrow_wedge_inside(h0, L);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw invalid_argument("build_fixed_point_operators: kappa must be positive");
  }
  if (kappa >= 2.0 / 3.0) {
    throw too_large(
        "build_fixed_point_operators: kappa >= 2/3 exceeds the cubic decay of "
        "the group factors, the weighted operators are no longer trace class");
  }
  if (neg_g.base_level == -std::numeric_limits<double>::infinity()) {
    if (!neg_g.bumps.empty()) {
      throw invalid_argument(
          "build_fixed_point_operators: bumps on an infinite ceiling");
    }
    DiscretizedKernel out;
    out.rule = half_line_exp(q, 0.0, outer_scale(t, 0.0));
    out.matrix = Eigen::MatrixXd::Zero(q, q);
    return out;
  }
  if (!std::isfinite(neg_g.base_level)) {
    throw invalid_argument(
        "build_fixed_point_operators: ceiling must be finite or +infinity");
  }
  const auto bumps = validated_bumps(neg_g);
  if (bumps.size() > 2) {
    throw invalid_argument(
        "build_fixed_point_operators: at most two ceiling dips supported");
  }
  const double M = -neg_g.base_level;
  std::vector<CeilingNotch> notches;
  for (const auto& bump : bumps) {
    if (!(bump.start > -L) || !(bump.start + bump.width < L)) {
      throw invalid_argument(
          "build_fixed_point_operators: dip must lie inside (-L, L)");
    }
    if (bump.height == 0.0) continue;
    notches.push_back(notch_at(bump.start, bump.width, bump.height));
  }
  std::sort(notches.begin(), notches.end(),
            [](const CeilingNotch& a, const CeilingNotch& b) {
              return a.sigma < b.sigma;
            });

  const WedgeContext ctx = make_wedge_context(t, L, h0.u, M, q);
  Eigen::MatrixXd kernel = ctx.base;
  for (const auto& n : notches) {
    kernel += single_notch_correction(ctx, n);
  }
  if (notches.size() == 2) {
    kernel -= pair_correction(ctx, notches[0], notches[1]);
  }
  return wrap_negated(ctx.lam, kernel);
}

double twin_peaks_prob_det(const NotchSize& eta1, const NotchSize& eta2,
                           double x1, double x2, double M, double L,
                           const InitialData& h0, int q, double t) {
  require_window(t, L, M, q);
  require_narrow_wedge_inside(h0, L);
  if (!(eta1.eps >= 0.0) || !(eta2.eps >= 0.0) || !(eta1.delta >= 0.0) ||
      !(eta2.delta >= 0.0)) {
    throw invalid_argument("twin_peaks_prob_det: notch sizes must be >= 0");
  }
  if (!(x1 < x2)) {
    throw invalid_argument("twin_peaks_prob_det: needs x1 < x2");
  }
  if (eta1.eps == 0.0 || eta2.eps == 0.0 || eta1.delta == 0.0 ||
      eta2.delta == 0.0) {
    return 0.0;
  }
  if (!(eta1.delta < x2 - x1) || !(eta2.delta < x2 - x1)) {
    throw invalid_argument(
        "twin_peaks_prob_det: notch windows must be narrower than x2 - x1");
  }
  if (!(x1 > -L) || !(x2 + eta2.delta < L)) {
    throw invalid_argument(
        "twin_peaks_prob_det: notch windows must lie inside (-L, L)");
  }

  const WedgeContext ctx = make_wedge_context(t, L, h0.u, M, q);
  const CeilingNotch first = notch_at(x1, eta1.delta, eta1.eps);
  const CeilingNotch second = notch_at(x2, eta2.delta, eta2.eps);
  const Eigen::MatrixXd v1 = single_notch_correction(ctx, first);
  const Eigen::MatrixXd v2 = single_notch_correction(ctx, second);
  const Eigen::MatrixXd v12 = pair_correction(ctx, first, second);

  const double d00 = det_one_minus(ctx.lam, ctx.base);
  const double d10 = det_one_minus(ctx.lam, ctx.base + v1);
  const double d01 = det_one_minus(ctx.lam, ctx.base + v2);
  const double d11 = det_one_minus(ctx.lam, ctx.base + v1 + v2 - v12);
  const double f = d00 - d10 - d01 + d11;
  if (f < -1e-8) {
    throw numeric_failure("twin_peaks_prob_det: negative probability");
  }
  return f;
}

double density_F(double x1, double x2, double M, double L,
                 const InitialData& h0, int q, double t) {
  require_window(t, L, M, q);
  require_narrow_wedge_inside(h0, L);
  if (!(x1 < x2)) {
    throw invalid_argument("density_F: needs x1 < x2");
  }
  if (!(x1 > -L) || !(x2 < L)) {
    throw invalid_argument("density_F: points must lie inside (-L, L)");
  }

  const WedgeContext ctx = make_wedge_context(t, L, h0.u, M, q);
  const Eigen::VectorXd sw = ctx.lam.weights.array().sqrt();
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(q, q) -
      sw.asDiagonal() * ctx.base * sw.asDiagonal();
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

  const Eigen::VectorXd w1 = sw.cwiseProduct(left_pin_vector(ctx, x1));
  const Eigen::VectorXd w2 = sw.cwiseProduct(left_pin_vector(ctx, x2));
  const Eigen::VectorXd z1 = sw.cwiseProduct(right_pin_vector(ctx, x1));
  const Eigen::VectorXd z2 = sw.cwiseProduct(right_pin_vector(ctx, x2));

  const Eigen::VectorXd rw1 = lu.solve(w1);
  const Eigen::VectorXd rw2 = lu.solve(w2);
  const double alpha1 = z1.dot(rw1);
  const double alpha2 = z2.dot(rw2);
  const double beta = z2.dot(rw1);
  const double gamma = z1.dot(rw2);
  const double c32 =
      std::pow(x2 - x1, -1.5) / std::sqrt(4.0 * kPi);
  const double det = lu.determinant();
  return det * (c32 * beta + alpha1 * alpha2 - beta * gamma);
}

}  // namespace kpzlab
