#include "kpzlab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kpzlab/common.hpp"
#include "kpzlab/specfun.hpp"

namespace kpzlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Chord weight of the midpoint value at column k: 0 outside the open window,
// rising linearly to 1 at im. reconstruct and the corner predicate must share
// this so the located corners describe exactly the curves reconstruct emits.
double chord_weight(const CurvePair& c, const ResampleState& st,
                    Eigen::Index k) {
  if (k <= st.ia || k >= st.ib) return 0.0;
  if (k <= st.im)
    return (c.x_at(k) - c.x_at(st.ia)) / (c.x_at(st.im) - c.x_at(st.ia));
  return (c.x_at(st.ib) - c.x_at(k)) / (c.x_at(st.ib) - c.x_at(st.im));
}

// z is feasible when the shifted top stays above the second curve on the
// window and the wedge profile stays at or below h(x0) strictly right of x0.
// Outside the window the top is untouched, so only window columns plus the
// precomputed right-tail maximum of the top enter.
bool z_feasible(const CurvePair& c, const ResampleState& st, double hx0,
                double max_top_right, double z) {
  const double dz = z - st.z_original;
  double run = 0.0;       // max(0, window prefix of second - top_z)
  double gap_max = kNegInf;  // unclamped window max of second - top_z
  for (Eigen::Index k = st.ia; k <= st.ib; ++k) {
    const double t = c.top[k] + chord_weight(c, st, k) * dz;
    const double gap = c.second[k] - t;
    if (gap > 0.0 && k > st.ia && k < st.ib) return false;
    if (gap > gap_max) gap_max = gap;
    if (gap > run) run = gap;
    if (t + run > hx0) return false;
  }
  // Right of the window the profile gains at most max(0, gap_max).
  if (gap_max > 0.0 && std::isfinite(max_top_right) &&
      max_top_right + gap_max > hx0)
    return false;
  return true;
}

double find_corner(const CurvePair& c, const ResampleState& st, double hx0,
                   double max_top_right, bool upper) {
  const double z0 = st.z_original;
  double step = 1.0;
  double good = z0;
  double bad = 0.0;
  for (int it = 0;; ++it) {
    if (it > 80) throw numeric_failure("corner bracket did not close");
    const double z = upper ? z0 + step : z0 - step;
    if (!z_feasible(c, st, hx0, max_top_right, z)) {
      bad = z;
      break;
    }
    good = z;
    step *= 2.0;
  }
  while (std::abs(bad - good) > 1e-8) {
    const double mid = 0.5 * (bad + good);
    if (z_feasible(c, st, hx0, max_top_right, mid))
      good = mid;
    else
      bad = mid;
  }
  return good;
}

void check_state(const CurvePair& curves, const ResampleState& st) {
  if (st.ia < 0 || st.ib >= curves.size() || st.ia >= st.im ||
      st.im >= st.ib)
    throw invalid_argument("resample state does not fit the curve pair");
}

double median(std::vector<double> v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h),
                   v.end());
  double m = v[h];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h) - 1,
                     v.begin() + static_cast<std::ptrdiff_t>(h));
    m = 0.5 * (m + v[h - 1]);
  }
  return m;
}

EpsRow wilson_row(double eps, int hits, int m) {
  EpsRow row;
  row.eps = eps;
  row.hits = hits;
  if (m < 1) return row;
  const double z = 1.959963984540054;
  const double p = static_cast<double>(hits) / m;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / m;
  const double centre = (p + z2 / (2.0 * m)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m)) / denom;
  row.freq = p;
  row.wilson_lo = std::max(0.0, centre - half);
  row.wilson_hi = std::min(1.0, centre + half);
  return row;
}

}  // namespace

Eigen::Index CurvePair::index_near(double x) const {
  if (top.size() == 0 || !(dx > 0.0))
    throw invalid_argument("curve pair is empty");
  if (!std::isfinite(x)) throw invalid_argument("abscissa must be finite");
  const auto k = static_cast<Eigen::Index>(std::llround((x - x_lo) / dx));
  if (k < 0 || k >= top.size())
    throw invalid_argument("abscissa outside the curve grid");
  return k;
}

CurvePair scaled_top_two(const Environment& env) {
  const Eigen::MatrixXd tt = melon_top_two(env);
  const double n13 = std::cbrt(static_cast<double>(env.n));
  const double scale = 2.0 * n13 * n13;
  CurvePair out;
  out.n = env.n;
  out.x_lo = -static_cast<double>(env.n) / scale;
  out.dx = env.grid_step / scale;
  out.top.resize(tt.cols());
  out.second.resize(tt.cols());
  for (Eigen::Index k = 0; k < tt.cols(); ++k) {
    const double centre = static_cast<double>(env.n) + env.x_at(k);
    out.top[k] = (tt(0, k) - centre) / n13;
    out.second[k] = (tt(1, k) - centre) / n13;
  }
  return out;
}

MaxInfo largest_maximizer(const CurvePair& curves, double x_cap) {
  if (curves.size() == 0) throw invalid_argument("curve pair is empty");
  if (std::isnan(x_cap) || !(x_cap > 0.0))
    throw invalid_argument("x_cap must be positive");
  MaxInfo best;
  best.value = kNegInf;
  bool found = false;
  for (Eigen::Index k = 0; k < curves.size(); ++k) {
    const double x = curves.x_at(k);
    if (std::abs(x) > x_cap) continue;
    if (curves.top[k] >= best.value) {
      best.value = curves.top[k];
      best.index = k;
      best.x0 = x;
      found = true;
    }
  }
  if (!found) throw invalid_argument("no grid column inside [-x_cap, x_cap]");
  return best;
}

ResampleState make_resample_state(const CurvePair& curves, double x0,
                                  double A) {
  if (!std::isfinite(A) || !(A > 0.0))
    throw invalid_argument("gap A must be positive and finite");
  ResampleState st;
  st.x0 = x0;
  st.A = A;
  st.ix0 = curves.index_near(x0);
  st.ia = curves.index_near(x0 + A);
  st.im = curves.index_near(x0 + A + 1.0);
  st.ib = curves.index_near(x0 + A + 2.0);
  if (st.ia <= st.ix0 || st.im <= st.ia || st.ib <= st.im)
    throw invalid_argument("resample window collapses on this grid");
  const double hx0 = curves.top[st.ix0];
  if (curves.top.segment(st.ix0, curves.size() - st.ix0).maxCoeff() > hx0)
    throw invalid_argument("x0 must be the largest maximizer of the top");

  const double xa = curves.x_at(st.ia);
  const double xm = curves.x_at(st.im);
  const double xb = curves.x_at(st.ib);
  st.z_original = curves.top[st.im];
  const double wa = (xb - xm) / (xb - xa);
  st.mu = wa * curves.top[st.ia] + (1.0 - wa) * curves.top[st.ib];
  st.sigma = std::sqrt(2.0 * (xm - xa) * (xb - xm) / (xb - xa));

  st.bridge_lo.resize(st.im - st.ia + 1);
  for (Eigen::Index j = 0; j <= st.im - st.ia; ++j) {
    const double frac = (curves.x_at(st.ia + j) - xa) / (xm - xa);
    st.bridge_lo[j] = curves.top[st.ia + j] -
                      (curves.top[st.ia] +
                       frac * (st.z_original - curves.top[st.ia]));
  }
  st.bridge_hi.resize(st.ib - st.im + 1);
  for (Eigen::Index j = 0; j <= st.ib - st.im; ++j) {
    const double frac = (curves.x_at(st.im + j) - xm) / (xb - xm);
    st.bridge_hi[j] = curves.top[st.im + j] -
                      (st.z_original +
                       frac * (curves.top[st.ib] - st.z_original));
  }

  const double max_top_right =
      st.ib + 1 < curves.size()
          ? curves.top.segment(st.ib + 1, curves.size() - st.ib - 1)
                .maxCoeff()
          : kNegInf;
  if (!z_feasible(curves, st, hx0, max_top_right, st.z_original))
    throw internal_error("original midpoint value tests infeasible");
  st.corner_lo = find_corner(curves, st, hx0, max_top_right, false);
  st.corner_hi = find_corner(curves, st, hx0, max_top_right, true);
  return st;
}

CurvePair reconstruct(const CurvePair& curves, const ResampleState& st,
                      double z) {
  if (!std::isfinite(z)) throw invalid_argument("z must be finite");
  check_state(curves, st);
  CurvePair out = curves;
  const double dz = z - st.z_original;
  for (Eigen::Index k = st.ia + 1; k < st.ib; ++k)
    out.top[k] = curves.top[k] + chord_weight(curves, st, k) * dz;
  return out;
}

SpatialProfile reconstructed_profile(const CurvePair& curves,
                                     const InitialData& h0) {
  if (h0.kind != InitialData::Kind::narrow_wedge || h0.u != 0.0)
    throw invalid_argument("curve pair profiles need the origin wedge");
  if (curves.size() == 0) throw invalid_argument("curve pair is empty");
  SpatialProfile prof;
  prof.t = 1.0;
  prof.x_grid.resize(static_cast<std::size_t>(curves.size()));
  prof.h.resize(static_cast<std::size_t>(curves.size()));
  double run = kNegInf;  // prefix max of second - top; 0 at the shared origin
  for (Eigen::Index k = 0; k < curves.size(); ++k) {
    run = std::max(run, curves.second[k] - curves.top[k]);
    prof.x_grid[static_cast<std::size_t>(k)] = curves.x_at(k);
    prof.h[static_cast<std::size_t>(k)] = curves.top[k] + run;
  }
  return prof;
}

ZSample sample_Z(const ResampleState& st, Rng& rng) {
  if (!(st.corner_hi >= st.corner_lo))
    throw invalid_argument("corners out of order");
  if (!(st.sigma > 0.0)) throw invalid_argument("sigma must be positive");
  ZSample out;
  if (st.corner_hi - st.corner_lo < 1e-12) {
    out.z = st.corner_hi;
    out.degenerate = true;
    return out;
  }
  const double a = normal_cdf((st.corner_lo - st.mu) / st.sigma);
  const double b = normal_cdf((st.corner_hi - st.mu) / st.sigma);
  const double p = a + rng.uniform() * (b - a);
  const double z = st.mu + st.sigma * normal_quantile(p);
  out.z = std::min(st.corner_hi, std::max(st.corner_lo, z));
  return out;
}

CurvePair gibbs_bridge_resample(const CurvePair& curves, double a, double b,
                                Rng& rng) {
  const Eigen::Index ia = curves.index_near(a);
  const Eigen::Index ib = curves.index_near(b);
  if (ib - ia < 2)
    throw invalid_argument("bridge interval needs an interior grid point");
  CurvePair out = curves;
  const double xb = curves.x_at(ib);
  const double vb = curves.top[ib];
  for (int attempt = 0; attempt < 100000; ++attempt) {
    bool ok = true;
    double v = curves.top[ia];
    double xprev = curves.x_at(ia);
    for (Eigen::Index k = ia + 1; k < ib; ++k) {
      const double xk = curves.x_at(k);
      const double mean = v + (vb - v) * (xk - xprev) / (xb - xprev);
      const double var = 2.0 * (xk - xprev) * (xb - xk) / (xb - xprev);
      v = mean + std::sqrt(var) * rng.normal();
      if (v <= curves.second[k]) {
        ok = false;
        break;
      }
      out.top[k] = v;
      xprev = xk;
    }
    if (ok) return out;
  }
  throw acceptance_too_low("bridge avoidance acceptance below 1e-5");
}

LowerBoundReport lower_bound_experiment(int n, const InitialData& h0,
                                        double A, double K, double L,
                                        const std::vector<double>& eps_list,
                                        int replicas, std::uint64_t seed,
                                        double beta, double grid_step) {
  if (h0.kind != InitialData::Kind::narrow_wedge || h0.u != 0.0)
    throw invalid_argument("the experiment runs from the origin wedge");
  if (n < 2) throw invalid_argument("need at least two lines");
  if (replicas < 1) throw invalid_argument("replicas must be >= 1");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw invalid_argument("beta must lie in (0, 1)");
  if (!(A > 0.0) || !(K > 0.0) || !(L > 0.0))
    throw invalid_argument("A, K, L must be positive");
  if (!(beta * L - A - 2.0 > 0.0))
    throw invalid_argument("window beta L - A - 2 is empty");
  for (double eps : eps_list)
    if (!(eps >= 0.0)) throw invalid_argument("eps must be >= 0");

  const double n13 = std::cbrt(static_cast<double>(n));
  const double x_max = n + 2.0 * beta * L * n13 * n13 + grid_step;
  const double x_window = beta * L - A - 2.0;

  struct Rep {
    bool usable = false;
    double hx0 = 0.0;
    double sup_win = kNegInf;
    double corner_hi = 0.0;
    double mu = 0.0;
  };
  std::vector<Rep> reps(static_cast<std::size_t>(replicas));
  std::vector<double> levels(static_cast<std::size_t>(replicas));

  for (int r = 0; r < replicas; ++r) {
    const Environment env =
        sample_environment(n, grid_step, x_max, 1.0, 0.0,
                           replica_seed(seed, 2 * static_cast<std::uint64_t>(r)));
    const CurvePair curves = scaled_top_two(env);
    const MaxInfo mx =
        largest_maximizer(curves, std::numeric_limits<double>::infinity());
    Rep& rep = reps[static_cast<std::size_t>(r)];
    rep.hx0 = mx.value;
    levels[static_cast<std::size_t>(r)] = mx.value;
    if (std::abs(mx.x0) > x_window) continue;

    const ResampleState st = make_resample_state(curves, mx.x0, A);
    Rng rng(replica_seed(seed, 2 * static_cast<std::uint64_t>(r) + 1));
    const ZSample zs = sample_Z(st, rng);
    const double dz = zs.z - st.z_original;
    double run = 0.0;
    double sup = kNegInf;
    for (Eigen::Index k = st.ia; k <= st.ib; ++k) {
      const double t = curves.top[k] + chord_weight(curves, st, k) * dz;
      run = std::max(run, curves.second[k] - t);
      sup = std::max(sup, t + run);
    }
    rep.usable = true;
    rep.sup_win = sup;
    rep.corner_hi = st.corner_hi;
    rep.mu = st.mu;
  }

  LowerBoundReport report;
  report.replicas = replicas;
  report.level_center = median(levels);
  const double c = report.level_center;
  const double level_window = beta * std::sqrt(L);

  for (const Rep& rep : reps) {
    if (rep.usable && rep.corner_hi - c <= 4.0 * K &&
        std::abs(rep.mu - c) <= K && std::abs(rep.hx0 - c) <= level_window)
      ++report.fav_hits;
  }
  report.fav_freq = static_cast<double>(report.fav_hits) / replicas;

  for (double eps : eps_list) {
    int hits = 0;
    for (const Rep& rep : reps) {
      if (rep.usable && std::abs(rep.hx0 - c) <= level_window &&
          rep.sup_win > rep.hx0 - eps)
        ++hits;
    }
    report.rows.push_back(wilson_row(eps, hits, replicas));
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int points = 0;
  for (const EpsRow& row : report.rows) {
    if (row.eps > 0.0 && row.hits > 0) {
      const double lx = std::log(row.eps);
      const double ly = std::log(row.freq);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++points;
    }
  }
  report.slope = points >= 2 ? (points * sxy - sx * sy) / (points * sxx - sx * sx)
                             : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace kpzlab
