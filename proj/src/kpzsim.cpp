#include "kpzlab/kpzsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kpzlab/common.hpp"

namespace kpzlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double scale23(int n) {
  const double n13 = std::cbrt(static_cast<double>(n));
  return 2.0 * n13 * n13;
}

// Index of the grid point nearest to 2 y n^{2/3}; negative when off-grid.
Eigen::Index map_y_index(const Environment& env, double y) {
  const double u = scale23(env.n) * y;
  const auto idx = static_cast<Eigen::Index>(std::llround(u / env.grid_step));
  return (idx >= 0 && idx < env.m()) ? idx : -1;
}

Eigen::Index map_x_index(const Environment& env, double x) {
  const double u = static_cast<double>(env.n) + scale23(env.n) * x;
  const auto idx = static_cast<Eigen::Index>(std::llround(u / env.grid_step));
  return (idx >= 0 && idx < env.m()) ? idx : -1;
}

double unmap_y(const Environment& env, Eigen::Index idx) {
  return env.x_at(idx) / scale23(env.n);
}

double unmap_x(const Environment& env, Eigen::Index idx) {
  return (env.x_at(idx) - env.n) / scale23(env.n);
}

// Support of the normalized data on the environment's mapped y-grid, as
// (grid index, h0 value) pairs. The normalization shifts horizontally by
// lambda_ and vertically by alpha + gamma_ lambda_^2.
std::vector<std::pair<Eigen::Index, double>> support_atoms(
    const Environment& env, const InitialData& h0) {
  const double level = h0.alpha + h0.gamma_ * h0.lambda_ * h0.lambda_;
  std::vector<std::pair<Eigen::Index, double>> atoms;
  auto add_point = [&](double y_normalized, double value) {
    const Eigen::Index idx = map_y_index(env, y_normalized);
    if (idx >= 0) atoms.emplace_back(idx, value - level);
  };
  switch (h0.kind) {
    case InitialData::Kind::narrow_wedge:
      add_point(h0.u + h0.lambda_, 0.0);
      break;
    case InitialData::Kind::double_wedge:
      add_point(h0.u + h0.lambda_, 0.0);
      add_point(h0.u2 + h0.lambda_, 0.0);
      break;
    case InitialData::Kind::tabulated: {
      const double lo = h0.grid.front() + h0.lambda_;
      const Eigen::Index last = env.m() - 1;
      const auto first_idx = std::max<Eigen::Index>(
          0, static_cast<Eigen::Index>(
                 std::ceil(scale23(env.n) * lo / env.grid_step - 0.5)));
      for (Eigen::Index idx = first_idx; idx <= last; ++idx) {
        const double y = unmap_y(env, idx) - h0.lambda_;
        if (y > h0.grid.back() + 1e-12) break;
        const double yy = std::clamp(y, h0.grid.front(), h0.grid.back());
        const auto cell = std::min<std::size_t>(
            h0.grid.size() - 2,
            static_cast<std::size_t>(
                std::upper_bound(h0.grid.begin(), h0.grid.end(), yy) -
                h0.grid.begin() - 1));
        const double y0 = h0.grid[cell], y1 = h0.grid[cell + 1];
        const double v0 = h0.values[cell], v1 = h0.values[cell + 1];
        if (std::isinf(v0) || std::isinf(v1)) continue;
        const double w = (yy - y0) / (y1 - y0);
        atoms.emplace_back(idx, v0 * (1.0 - w) + v1 * w - level);
      }
      break;
    }
  }
  return atoms;
}

}  // namespace

InitialData narrow_wedge(double u) {
  InitialData h0;
  h0.kind = InitialData::Kind::narrow_wedge;
  h0.u = u;
  h0.alpha = u * u;
  h0.gamma_ = 1.0;
  h0.lambda_ = -u;
  h0.theta = std::max(1.0, std::abs(u));
  validate_initial_data(h0);
  return h0;
}

InitialData double_wedge(double u1, double u2) {
  InitialData h0;
  h0.kind = InitialData::Kind::double_wedge;
  h0.u = std::min(u1, u2);
  h0.u2 = std::max(u1, u2);
  h0.alpha = std::max(h0.u * h0.u, h0.u2 * h0.u2);
  h0.gamma_ = 1.0;
  h0.lambda_ = -h0.u;
  h0.theta = std::max({1.0, std::abs(h0.u), std::abs(h0.u2)});
  validate_initial_data(h0);
  return h0;
}

InitialData tabulated(std::vector<double> grid, std::vector<double> values,
                      double alpha, double gamma, double lambda,
                      double theta) {
  InitialData h0;
  h0.kind = InitialData::Kind::tabulated;
  h0.grid = std::move(grid);
  h0.values = std::move(values);
  h0.alpha = alpha;
  h0.gamma_ = gamma;
  h0.lambda_ = lambda;
  h0.theta = theta;
  validate_initial_data(h0);
  return h0;
}

void validate_initial_data(const InitialData& h0) {
  if (!(h0.gamma_ > 0.0)) throw invalid_argument("gamma must be positive");
  if (!(h0.theta > 0.0)) throw invalid_argument("theta must be positive");
  auto check_point = [&](double y, double v) {
    if (v == kNegInf) return;
    if (!std::isfinite(v)) throw invalid_argument("initial value not finite");
    if (v > h0.alpha - h0.gamma_ * y * y + 1e-12) {
      throw invalid_argument("initial data violates its decay envelope");
    }
    if (y < -h0.lambda_ - 1e-12) {
      throw invalid_argument("initial data supported left of -lambda");
    }
  };
  bool witness = false;
  auto check_witness = [&](double y, double v) {
    if (std::abs(y) <= h0.theta && v >= -h0.theta) witness = true;
  };
  switch (h0.kind) {
    case InitialData::Kind::narrow_wedge:
      check_point(h0.u, 0.0);
      check_witness(h0.u, 0.0);
      break;
    case InitialData::Kind::double_wedge:
      if (!(h0.u < h0.u2)) {
        throw invalid_argument("double wedge needs two distinct points");
      }
      check_point(h0.u, 0.0);
      check_point(h0.u2, 0.0);
      check_witness(h0.u, 0.0);
      check_witness(h0.u2, 0.0);
      break;
    case InitialData::Kind::tabulated: {
      if (h0.grid.size() < 2 || h0.grid.size() != h0.values.size()) {
        throw invalid_argument("tabulated data needs matching grids");
      }
      if (!std::is_sorted(h0.grid.begin(), h0.grid.end()) ||
          std::adjacent_find(h0.grid.begin(), h0.grid.end()) !=
              h0.grid.end()) {
        throw invalid_argument("tabulated grid must strictly increase");
      }
      bool any_finite = false;
      for (std::size_t i = 0; i < h0.grid.size(); ++i) {
        check_point(h0.grid[i], h0.values[i]);
        check_witness(h0.grid[i], h0.values[i]);
        if (h0.values[i] != kNegInf) any_finite = true;
      }
      if (!any_finite) {
        throw invalid_argument("initial data is identically -infinity");
      }
      break;
    }
  }
  if (!witness) {
    throw invalid_argument("no witness point within the theta radius");
  }
}

SheetSlice airy_sheet_slice(const Environment& env,
                            const std::vector<double>& y_list,
                            const std::vector<double>& x_list) {
  if (y_list.empty() || x_list.empty()) {
    throw invalid_argument("sheet slice needs nonempty point lists");
  }
  const double n13 = std::cbrt(static_cast<double>(env.n));
  SheetSlice out;
  out.s.resize(static_cast<Eigen::Index>(y_list.size()),
               static_cast<Eigen::Index>(x_list.size()));
  for (std::size_t r = 0; r < y_list.size(); ++r) {
    Eigen::Index iy = map_y_index(env, y_list[r]);
    if (iy < 0) {
      iy = std::clamp<Eigen::Index>(
          static_cast<Eigen::Index>(
              std::llround(scale23(env.n) * y_list[r] / env.grid_step)),
          0, env.m() - 1);
      out.snapped = true;
    }
    const Eigen::VectorXd prof = lpp_profile(env, iy, env.n, 1);
    const double y = unmap_y(env, iy);
    for (std::size_t c = 0; c < x_list.size(); ++c) {
      Eigen::Index ix = map_x_index(env, x_list[c]);
      if (ix < 0) {
        ix = std::clamp<Eigen::Index>(
            static_cast<Eigen::Index>(std::llround(
                (env.n + scale23(env.n) * x_list[c]) / env.grid_step)),
            0, env.m() - 1);
        out.snapped = true;
      }
      if (ix < iy) {
        out.s(r, c) = kNegInf;
        continue;
      }
      const double x = unmap_x(env, ix);
      out.s(r, c) =
          (prof[ix] - 2.0 * env.n - scale23(env.n) * (x - y)) / n13;
    }
  }
  return out;
}

SpatialProfile h_profile(const Environment& env, const InitialData& h0,
                         const std::vector<double>& x_grid) {
  validate_initial_data(h0);
  if (x_grid.empty()) throw invalid_argument("profile needs an x grid");
  const auto atoms = support_atoms(env, h0);
  if (atoms.empty()) {
    throw degenerate_input("initial data has no support on the grid");
  }
  const double n13 = std::cbrt(static_cast<double>(env.n));
  SpatialProfile prof;
  prof.t = 1.0;
  prof.x_translation = h0.lambda_;
  prof.level_shift = h0.alpha + h0.gamma_ * h0.lambda_ * h0.lambda_;
  prof.x_grid.reserve(x_grid.size());
  prof.h.assign(x_grid.size(), kNegInf);
  std::vector<Eigen::Index> xi(x_grid.size());
  for (std::size_t c = 0; c < x_grid.size(); ++c) {
    const Eigen::Index ix = map_x_index(env, x_grid[c]);
    if (ix < 0) throw invalid_argument("profile point maps outside the grid");
    xi[c] = ix;
    prof.x_grid.push_back(unmap_x(env, ix));
  }
  for (const auto& [iy, v] : atoms) {
    const Eigen::VectorXd dp = lpp_profile(env, iy, env.n, 1);
    const double y = unmap_y(env, iy);
    for (std::size_t c = 0; c < x_grid.size(); ++c) {
      if (xi[c] < iy) continue;
      const double s =
          (dp[xi[c]] - 2.0 * env.n - scale23(env.n) * (prof.x_grid[c] - y)) /
          n13;
      prof.h[c] = std::max(prof.h[c], v + s);
    }
  }
  if (std::all_of(prof.h.begin(), prof.h.end(),
                  [](double v) { return v == kNegInf; })) {
    throw degenerate_input("profile is identically -infinity");
  }
  return prof;
}

SpacetimeField h_spacetime(const Environment& env, const InitialData& h0,
                           const std::vector<double>& t_grid,
                           const std::vector<double>& x_grid) {
  if (t_grid.empty()) throw invalid_argument("need at least one time");
  SpacetimeField field;
  field.t_grid = t_grid;
  field.x_grid = x_grid;
  field.h.resize(static_cast<Eigen::Index>(t_grid.size()),
                 static_cast<Eigen::Index>(x_grid.size()));
  for (std::size_t r = 0; r < t_grid.size(); ++r) {
    const double t = t_grid[r];
    if (!(t > 0.0) || t > 1.0) {
      throw invalid_argument("time must lie in (0, 1]");
    }
    const int nt = static_cast<int>(std::floor(t * env.n));
    if (nt < 2) throw invalid_argument("time slice needs at least two lines");
    Environment sub;
    sub.n = nt;
    sub.grid_step = env.grid_step;
    sub.x_max = env.x_max;
    sub.values = env.values.topRows(nt);
    sub.provenance = env.provenance;
    sub.rate = env.rate;
    sub.drift = env.drift;
    sub.seed = env.seed;
    const SpatialProfile slice = h_profile(sub, h0, x_grid);
    for (std::size_t c = 0; c < x_grid.size(); ++c) {
      field.h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          slice.h[c];
    }
    field.x_translation = slice.x_translation;
    field.level_shift = slice.level_shift;
  }
  return field;
}

TPReport find_near_maximizers(const SpatialProfile& profile, double eps,
                              double A, double L, double beta) {
  if (!(A > 0.0) || !(L > 0.0) || !(beta > 0.0) || eps < 0.0) {
    throw invalid_argument("need A, L, beta > 0 and eps >= 0");
  }
  const double window = beta * L;
  double best = kNegInf;
  double argmax = kNegInf;
  for (std::size_t i = 0; i < profile.x_grid.size(); ++i) {
    const double x = profile.x_grid[i];
    if (std::abs(x) > window || profile.h[i] == kNegInf) continue;
    if (profile.h[i] >= best) {
      best = profile.h[i];
      argmax = x;
    }
  }
  if (best == kNegInf) {
    throw degenerate_input("profile has no finite value in the window");
  }
  std::vector<std::size_t> close;
  for (std::size_t i = 0; i < profile.x_grid.size(); ++i) {
    const double x = profile.x_grid[i];
    if (std::abs(x) > window || profile.h[i] == kNegInf) continue;
    if (best - profile.h[i] <= eps) close.push_back(i);
  }
  TPReport report;
  report.max_value = best;
  report.argmax = argmax;
  for (std::size_t a = 0; a < close.size(); ++a) {
    for (std::size_t b = a + 1; b < close.size(); ++b) {
      const double x1 = profile.x_grid[close[a]];
      const double x2 = profile.x_grid[close[b]];
      if (x2 - x1 < A) continue;
      report.pairs.push_back({x1, x2, best - profile.h[close[a]],
                              best - profile.h[close[b]]});
    }
  }
  std::sort(report.pairs.begin(), report.pairs.end(),
            [](const TPPair& p, const TPPair& q) {
              return p.x1 < q.x1 || (p.x1 == q.x1 && p.x2 < q.x2);
            });
  report.in_tp_set =
      std::abs(best) <= beta * std::sqrt(L) && !report.pairs.empty();
  return report;
}

}  // namespace kpzlab
