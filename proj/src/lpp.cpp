#include "kpzlab/lpp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "kpzlab/common.hpp"
#include "kpzlab/rng.hpp"

namespace kpzlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr Eigen::Index kEntryBudget = 300'000'000;

void check_lines(const Environment& env, int from_line, int to_line) {
  if (env.n < 1 || env.values.rows() != env.n || env.values.cols() < 1) {
    throw invalid_argument("environment is empty");
  }
  if (to_line < 1 || from_line < to_line || from_line > env.n) {
    throw invalid_argument("line range must satisfy 1 <= to <= from <= n");
  }
}

// In-place two-line melon step over [0, m). Returns true when any value
// moved by more than float noise.
bool pitman_sweep(double* top, double* bot, Eigen::Index m) {
  bool changed = false;
  double run = bot[0] - top[0];
  for (Eigen::Index i = 0; i < m; ++i) {
    run = std::max(run, bot[i] - top[i]);
    const double nt = top[i] + run;
    const double nb = top[i] + bot[i] - nt;
    if (std::abs(nt - top[i]) > 1e-12 * (1.0 + std::abs(top[i]))) {
      changed = true;
    }
    top[i] = nt;
    bot[i] = nb;
  }
  return changed;
}

std::vector<std::vector<int>> subsets_of_size(int n, int j) {
  std::vector<std::vector<int>> out;
  std::vector<int> pick(j);
  for (int i = 0; i < j; ++i) pick[i] = i + 1;
  while (true) {
    out.push_back(pick);
    int k = j - 1;
    while (k >= 0 && pick[k] == n - (j - 1 - k)) --k;
    if (k < 0) break;
    ++pick[k];
    for (int i = k + 1; i < j; ++i) pick[i] = pick[i - 1] + 1;
  }
  return out;
}

}  // namespace

Eigen::Index Environment::index_of(double x) const {
  const double pos = x / grid_step;
  const auto idx = static_cast<Eigen::Index>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(idx)) > 1e-6 ||
      idx < 0 || idx >= m()) {
    throw invalid_argument("point is not on the environment grid");
  }
  return idx;
}

Environment sample_environment(int n, double grid_step, double x_max,
                               double rate, double drift, std::uint64_t seed) {
  if (n < 1) throw invalid_argument("need at least one line");
  if (!(grid_step > 0.0) || !(x_max >= grid_step)) {
    throw invalid_argument("need 0 < grid_step <= x_max");
  }
  if (!(rate > 0.0)) throw invalid_argument("rate must be positive");
  const auto m = static_cast<Eigen::Index>(std::llround(x_max / grid_step)) + 1;
  if (static_cast<Eigen::Index>(n) * m > kEntryBudget) {
    throw too_large("environment exceeds the entry budget");
  }
  Environment env;
  env.n = n;
  env.grid_step = grid_step;
  env.x_max = static_cast<double>(m - 1) * grid_step;
  env.values.resize(n, m);
  env.provenance = Provenance::brownian;
  env.rate = rate;
  env.drift = drift;
  env.seed = seed;
  const double mean = drift * grid_step;
  const double sd = std::sqrt(rate * grid_step);
  for (int line = 0; line < n; ++line) {
    Rng rng(replica_seed(seed, static_cast<std::uint64_t>(line)));
    double v = 0.0;
    env.values(line, 0) = 0.0;
    for (Eigen::Index i = 1; i < m; ++i) {
      v += mean + sd * rng.normal();
      env.values(line, i) = v;
    }
  }
  return env;
}

Eigen::VectorXd lpp_profile(const Environment& env, Eigen::Index start_index,
                            int from_line, int to_line) {
  check_lines(env, from_line, to_line);
  if (start_index < 0 || start_index >= env.m()) {
    throw invalid_argument("start index outside the grid");
  }
  const Eigen::Index m = env.m();
  Eigen::VectorXd best = Eigen::VectorXd::Constant(m, kNegInf);
  {
    const double* f = env.values.row(from_line - 1).data();
    for (Eigen::Index i = start_index; i < m; ++i) {
      best[i] = f[i] - f[start_index];
    }
  }
  for (int line = from_line - 1; line >= to_line; --line) {
    const double* f = env.values.row(line - 1).data();
    double run = kNegInf;
    for (Eigen::Index i = start_index; i < m; ++i) {
      run = std::max(run, best[i] - f[i]);
      best[i] = f[i] + run;
    }
  }
  return best;
}

double lpp_value(const Environment& env, double y, double x, int from_line,
                 int to_line) {
  if (from_line == 0) from_line = env.n;
  check_lines(env, from_line, to_line);
  if (y > x) return kNegInf;
  const Eigen::Index iy = env.index_of(y);
  const Eigen::Index ix = env.index_of(x);
  return lpp_profile(env, iy, from_line, to_line)[ix];
}

double lpp_disjoint(const Environment& env, int j, double x) {
  check_lines(env, env.n, 1);
  if (j < 1 || j > env.n) throw invalid_argument("need 1 <= j <= n");
  const Eigen::Index ix = env.index_of(x);
  if (env.n > 4 || ix > 59) {
    throw too_large("disjoint-path oracle is for small instances");
  }
  if (ix == 0) return 0.0;

  // State: which j lines the ordered paths occupy on the current grid cell.
  // A transition may only move each path weakly upward.
  const std::vector<std::vector<int>> states = subsets_of_size(env.n, j);
  const std::size_t ns = states.size();
  auto cell_weight = [&](const std::vector<int>& s, Eigen::Index cell) {
    double w = 0.0;
    for (int line : s) {
      w += env.values(line - 1, cell + 1) - env.values(line - 1, cell);
    }
    return w;
  };
  std::vector<double> value(ns), next(ns);
  for (std::size_t s = 0; s < ns; ++s) value[s] = cell_weight(states[s], 0);
  for (Eigen::Index cell = 1; cell < ix; ++cell) {
    for (std::size_t t = 0; t < ns; ++t) {
      double best = kNegInf;
      for (std::size_t s = 0; s < ns; ++s) {
        bool ok = true;
        for (int a = 0; a < j; ++a) {
          if (states[t][a] > states[s][a]) { ok = false; break; }
        }
        if (ok) best = std::max(best, value[s]);
      }
      next[t] = best + cell_weight(states[t], cell);
    }
    value.swap(next);
  }
  return *std::max_element(value.begin(), value.end());
}

std::pair<std::vector<double>, std::vector<double>> pitman_pair(
    const std::vector<double>& top, const std::vector<double>& bottom) {
  if (top.size() != bottom.size() || top.empty()) {
    throw invalid_argument("pitman pair needs two lines on one grid");
  }
  if (std::abs(top[0]) > 1e-9 || std::abs(bottom[0]) > 1e-9) {
    throw invalid_argument("pitman pair needs lines vanishing at the origin");
  }
  std::vector<double> t = top, b = bottom;
  pitman_sweep(t.data(), b.data(), static_cast<Eigen::Index>(t.size()));
  return {std::move(t), std::move(b)};
}

double MelonEnsemble::snapped_abscissa(double x) const {
  const double n23 = std::cbrt(static_cast<double>(env.n));
  const double scale = 2.0 * n23 * n23;
  const double u = static_cast<double>(env.n) + scale * x;
  const auto idx = static_cast<Eigen::Index>(std::llround(u / env.grid_step));
  if (idx < 0 || idx >= env.m()) {
    throw invalid_argument("scaled point maps outside the grid");
  }
  return (static_cast<double>(idx) * env.grid_step - env.n) / scale;
}

double MelonEnsemble::scaled_value(int j, double x) const {
  if (j < 1 || j > env.n) throw invalid_argument("curve index out of range");
  const double n23 = std::cbrt(static_cast<double>(env.n));
  const double scale = 2.0 * n23 * n23;
  const double snapped = snapped_abscissa(x);
  const auto idx = static_cast<Eigen::Index>(
      std::llround((env.n + scale * snapped) / env.grid_step));
  const double centred =
      env.values(j - 1, idx) - 2.0 * env.n - scale * snapped;
  return centred / n23;
}

namespace {

// Piecewise-linear ensemble on a shared, possibly non-uniform breakpoint
// list. The melon of piecewise-linear lines is itself piecewise linear, but
// with extra vertices: wherever bottom-top crosses its own running maximum.
// Jump times of optimal melon-side paths sit at those crossings, so the
// passage-value identity only closes once they are carried explicitly.
struct PLEnsemble {
  std::vector<double> xs;
  std::vector<std::vector<double>> lines;
};

double pl_interpolate(const std::vector<double>& xs,
                      const std::vector<double>& f, double x,
                      std::size_t hint_cell) {
  const double x0 = xs[hint_cell], x1 = xs[hint_cell + 1];
  const double w = (x - x0) / (x1 - x0);
  return f[hint_cell] * (1.0 - w) + f[hint_cell + 1] * w;
}

// One Pitman step on lines a (top) and b (bottom). First pass collects the
// crossings of (b - a) with its running max; if any exist the whole ensemble
// is refined and the step re-entered, so the apply pass always runs on a
// crossing-free grid.
bool pl_pitman_step(PLEnsemble& e, std::size_t a, std::size_t b) {
  while (true) {
    const std::vector<double>& top = e.lines[a];
    const std::vector<double>& bot = e.lines[b];
    const std::size_t m = e.xs.size();
    std::vector<double> crossings;
    double run = bot[0] - top[0];
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double g0 = bot[i] - top[i];
      const double g1 = bot[i + 1] - top[i + 1];
      if (g0 < run && g1 > run) {
        const double t = (run - g0) / (g1 - g0);
        const double tau = e.xs[i] + t * (e.xs[i + 1] - e.xs[i]);
        const double slack = 1e-12 * (1.0 + std::abs(e.xs[i + 1]));
        if (tau > e.xs[i] + slack && tau < e.xs[i + 1] - slack) {
          crossings.push_back(tau);
        }
      }
      run = std::max(run, g1);
    }
    if (crossings.empty()) break;
    std::vector<double> xs;
    xs.reserve(m + crossings.size());
    std::vector<std::vector<double>> lines(e.lines.size());
    for (auto& l : lines) l.reserve(xs.capacity());
    std::size_t c = 0;
    for (std::size_t i = 0; i < m; ++i) {
      xs.push_back(e.xs[i]);
      for (std::size_t k = 0; k < e.lines.size(); ++k) {
        lines[k].push_back(e.lines[k][i]);
      }
      while (c < crossings.size() && i + 1 < m &&
             crossings[c] < e.xs[i + 1]) {
        xs.push_back(crossings[c]);
        for (std::size_t k = 0; k < e.lines.size(); ++k) {
          lines[k].push_back(
              pl_interpolate(e.xs, e.lines[k], crossings[c], i));
        }
        ++c;
      }
    }
    e.xs = std::move(xs);
    e.lines = std::move(lines);
  }
  return pitman_sweep(e.lines[a].data(), e.lines[b].data(),
                      static_cast<Eigen::Index>(e.xs.size()));
}

PLEnsemble pl_from_env(const Environment& env) {
  PLEnsemble pl;
  pl.xs.resize(env.m());
  for (Eigen::Index i = 0; i < env.m(); ++i) pl.xs[i] = env.x_at(i);
  pl.lines.assign(env.n, {});
  for (int j = 0; j < env.n; ++j) {
    pl.lines[j].assign(env.values.row(j).data(),
                       env.values.row(j).data() + env.m());
    if (std::abs(pl.lines[j][0]) > 1e-9) {
      throw invalid_argument("melon input lines must vanish at the origin");
    }
  }
  return pl;
}

void pl_melon_sort(PLEnsemble& e) {
  const auto n = static_cast<long>(e.lines.size());
  const long cap = n * (n - 1) / 2 + n;
  bool changed = n > 1;
  long pass = 0;
  while (changed) {
    if (++pass > cap) {
      throw internal_error("melon sort failed to converge");
    }
    changed = false;
    for (std::size_t k = 0; k + 1 < e.lines.size(); ++k) {
      if (pl_pitman_step(e, k, k + 1)) changed = true;
    }
  }
}

std::size_t pl_index_near(const std::vector<double>& xs, double v) {
  auto i = static_cast<std::size_t>(
      std::lower_bound(xs.begin(), xs.end(), v - 1e-9) - xs.begin());
  if (i + 1 < xs.size() && std::abs(xs[i + 1] - v) < std::abs(xs[i] - v)) ++i;
  return i;
}

double pl_lpp_value(const PLEnsemble& e, double y, double x) {
  const std::size_t iy = pl_index_near(e.xs, y);
  const std::size_t ix = pl_index_near(e.xs, x);
  std::vector<double> best(ix - iy + 1);
  {
    const std::vector<double>& f = e.lines.back();
    for (std::size_t i = iy; i <= ix; ++i) best[i - iy] = f[i] - f[iy];
  }
  for (std::size_t line = e.lines.size() - 1; line-- > 0;) {
    const std::vector<double>& f = e.lines[line];
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t i = iy; i <= ix; ++i) {
      run = std::max(run, best[i - iy] - f[i]);
      best[i - iy] = f[i] + run;
    }
  }
  return best.back();
}

}  // namespace

MelonEnsemble melon(const Environment& env) {
  check_lines(env, env.n, 1);
  for (int j = 0; j < env.n; ++j) {
    if (std::abs(env.values(j, 0)) > 1e-9) {
      throw invalid_argument("melon input lines must vanish at the origin");
    }
  }
  MelonEnsemble out;
  out.env = env;
  out.env.provenance = Provenance::deterministic;
  if (env.n < 2) return out;
  // Sort in the piecewise-linear representation, then read the curves back
  // at the original abscissas. Grid-sampled sweeps are not enough: after one
  // step the intermediate curves have vertices between grid points, and
  // later running maxima live on those vertices. A grid-only fixed point can
  // be ordered yet sit strictly below the true melon.
  PLEnsemble pl = pl_from_env(env);
  pl_melon_sort(pl);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < env.m(); ++i) {
    const double xi = env.x_at(i);
    while (k + 1 < pl.xs.size() &&
           pl.xs[k] < xi - 1e-12 * (1.0 + std::abs(xi))) {
      ++k;
    }
    for (int j = 0; j < env.n; ++j) out.env.values(j, i) = pl.lines[j][k];
  }
  return out;
}

Eigen::MatrixXd melon_top_two(const Environment& env) {
  check_lines(env, env.n, 1);
  const int n = env.n;
  const Eigen::Index m = env.m();
  if (n < 2) throw invalid_argument("pair curves need at least two lines");
  if (static_cast<double>(n) * n * m > kEntryBudget) {
    throw too_large("pair-curve DP would exceed the entry budget");
  }

  // single[l-1]: best one-path value with head on line l at the current
  // column; pair[p(l1,l2)]: best two disjoint paths with heads on l1 < l2.
  // Jumps relax each head weakly upward between columns.
  auto p = [n](int l1, int l2) {
    return (l1 - 1) * n - (l1 * (l1 + 1)) / 2 + l2 - 1;
  };
  std::vector<double> single(n, 0.0), pair(static_cast<std::size_t>(p(n - 1, n)) + 1, 0.0);
  Eigen::MatrixXd curves = Eigen::MatrixXd::Zero(2, m);
  for (Eigen::Index cell = 0; cell + 1 < m; ++cell) {
    std::vector<double> inc(n);
    for (int l = 1; l <= n; ++l) {
      inc[l - 1] = env.values(l - 1, cell + 1) - env.values(l - 1, cell);
    }
    double best1 = kNegInf, best2 = kNegInf;
    for (int l = 1; l <= n; ++l) {
      single[l - 1] += inc[l - 1];
      best1 = std::max(best1, single[l - 1]);
    }
    for (int l1 = 1; l1 < n; ++l1) {
      for (int l2 = l1 + 1; l2 <= n; ++l2) {
        double& v = pair[p(l1, l2)];
        v += inc[l1 - 1] + inc[l2 - 1];
        best2 = std::max(best2, v);
      }
    }
    curves(0, cell + 1) = best1;
    curves(1, cell + 1) = best2 - best1;
    for (int l = n - 1; l >= 1; --l) {
      single[l - 1] = std::max(single[l - 1], single[l]);
    }
    for (int l1 = n - 1; l1 >= 1; --l1) {
      for (int l2 = n; l2 > l1; --l2) {
        double& v = pair[p(l1, l2)];
        if (l1 + 1 < l2) v = std::max(v, pair[p(l1 + 1, l2)]);
        if (l2 < n) v = std::max(v, pair[p(l1, l2 + 1)]);
      }
    }
  }
  return curves;
}

std::vector<IdentitySample> melon_identity_report(
    const Environment& env,
    const std::vector<std::pair<double, double>>& samples) {
  check_lines(env, env.n, 1);
  PLEnsemble pl = pl_from_env(env);
  pl_melon_sort(pl);
  std::vector<IdentitySample> out;
  out.reserve(samples.size());
  for (const auto& [y, x] : samples) {
    if (y < 0.0) throw invalid_argument("start coordinate must be >= 0");
    IdentitySample s;
    s.y = y;
    s.x = x;
    s.direct = lpp_value(env, y, x);
    s.melon = pl_lpp_value(pl, y, x);
    s.diff = s.melon - s.direct;
    out.push_back(s);
  }
  return out;
}

}  // namespace kpzlab
