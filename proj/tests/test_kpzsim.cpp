#include "kpzlab/kpzsim.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "kpzlab/common.hpp"
#include "kpzlab/rng.hpp"

using namespace kpzlab;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Standard-rate lines: the centering 2n + 2(x-y)n^{2/3} of the scaled form
// assumes rate-one environment lines (the scaled curves then locally have
// rate two, matching the bridge module's convention).
Environment scaled_env(int n, double x_window, std::uint64_t seed,
                       double step = 0.25) {
  const double n23 = std::pow(static_cast<double>(n), 2.0 / 3.0);
  return sample_environment(n, step, n + 2.0 * x_window * n23 + step, 1.0,
                            0.0, seed);
}

}  // namespace

TEST_CASE("sheet slice basics: emptiness, snapping, determinism") {
  const Environment env = scaled_env(27, 1.0, 3);
  const SheetSlice slice = airy_sheet_slice(env, {0.0, 1.5}, {-0.5, 0.0, 0.5});
  CHECK_FALSE(slice.snapped);
  // y = 1.5 starts past x = -0.5's endpoint at n = 27 (27 > 18 on the grid).
  CHECK(slice.s(1, 0) == kNegInf);
  CHECK(std::isfinite(slice.s(0, 1)));
  const SheetSlice again = airy_sheet_slice(env, {0.0, 1.5}, {-0.5, 0.0, 0.5});
  CHECK(slice.s(0, 2) == again.s(0, 2));

  const SheetSlice clipped = airy_sheet_slice(env, {-1.0}, {0.0});
  CHECK(clipped.snapped);
}

TEST_CASE("sheet value at the origin has the scaled passage law") {
  // Each of the n-1 grid-restricted jumps loses the overshoot of the local
  // running max, about sqrt(2/pi) sqrt(step) in expectation, so the location
  // sits below the limit-law mean -1.77 by roughly that amount per jump
  // (measured per-jump coefficient 0.78 at this size). The deficit
  // concentrates: the spread stays at the limit-law scale.
  const int n = 256, reps = 600;
  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Environment env = scaled_env(n, 0.05, 40000 + r);
    const double v = airy_sheet_slice(env, {0.0}, {0.0}).s(0, 0);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(sq / reps - mean * mean);
  const double per_jump =
      -(mean + 1.77) * std::cbrt(static_cast<double>(n)) / (0.5 * (n - 1));
  CHECK(per_jump > 0.72);
  CHECK(per_jump < 0.84);
  CHECK(sd > 0.75);
  CHECK(sd < 1.05);
}

TEST_CASE("sheet values at nearby arguments are strongly coupled") {
  // Scaled profiles move locally like rate-two Brownian motion, so the
  // increment over 0.1 has variance near 0.2; grid jump times shave a bit
  // off. Correlation follows from that plus the unit-order marginal spread.
  const int reps = 800;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, sdd = 0, sd1 = 0;
  for (int r = 0; r < reps; ++r) {
    const Environment env = scaled_env(500, 0.2, 90000 + r);
    const SheetSlice s = airy_sheet_slice(env, {0.0}, {0.0, 0.1});
    const double a = s.s(0, 0), b = s.s(0, 1), d = b - a;
    sx += a; sy += b; sxx += a * a; syy += b * b; sxy += a * b;
    sd1 += d; sdd += d * d;
  }
  const double n = reps;
  const double corr = (sxy / n - sx * sy / (n * n)) /
                      std::sqrt((sxx / n - sx * sx / (n * n)) *
                                (syy / n - sy * sy / (n * n)));
  const double var_diff = sdd / n - (sd1 / n) * (sd1 / n);
  CHECK(corr > 0.85);
  CHECK(var_diff > 0.10);
  CHECK(var_diff < 0.30);
}

TEST_CASE("initial data validation") {
  CHECK_THROWS_AS(double_wedge(1.0, 1.0), invalid_argument);
  CHECK_THROWS_AS(tabulated({0.0, 1.0}, {5.0, 0.0}, 1.0, 1.0, 0.0, 1.0),
                  invalid_argument);  // envelope violated at y=0
  CHECK_THROWS_AS(tabulated({0.0, 1.0}, {kNegInf, kNegInf}, 1.0, 1.0, 0.0, 1.0),
                  invalid_argument);
  CHECK_THROWS_AS(tabulated({-2.0, 0.0}, {0.0, 0.0}, 1.0, 1.0, 1.0, 2.0),
                  invalid_argument);  // support below -lambda
  CHECK_THROWS_AS(tabulated({0.0, 1.0}, {-9.0, -9.0}, 1.0, 1.0, 0.0, 2.0),
                  invalid_argument);  // no witness within theta
  CHECK_NOTHROW(tabulated({0.0, 1.0, 2.0}, {0.0, kNegInf, 0.0}, 4.0, 1.0, 0.0,
                          1.0));
}

TEST_CASE("narrow wedge profile equals the top scaled curve") {
  const Environment env = scaled_env(64, 1.2, 17);
  std::vector<double> xs;
  for (double x = -1.0; x <= 1.0; x += 0.125) xs.push_back(x);
  const SpatialProfile prof = h_profile(env, narrow_wedge(0.0), xs);
  CHECK(prof.level_shift == 0.0);
  CHECK(prof.x_translation == 0.0);
  const MelonEnsemble w = melon(env);
  const SheetSlice sheet = airy_sheet_slice(env, {0.0}, xs);
  for (std::size_t c = 0; c < xs.size(); ++c) {
    CHECK(prof.h[c] == sheet.s(0, static_cast<Eigen::Index>(c)));
    CHECK(prof.h[c] ==
          doctest::Approx(w.scaled_value(1, xs[c])).epsilon(1e-9));
  }
}

TEST_CASE("double wedge profile is the two-point maximum") {
  const Environment env = scaled_env(64, 1.5, 23);
  std::vector<double> xs = {-0.5, 0.0, 0.5, 1.0};
  const SpatialProfile prof = h_profile(env, double_wedge(0.0, 1.0), xs);
  const SheetSlice sheet = airy_sheet_slice(env, {0.0, 1.0}, xs);
  for (std::size_t c = 0; c < xs.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    CHECK(prof.h[c] + prof.level_shift ==
          doctest::Approx(std::max(sheet.s(0, ci), sheet.s(1, ci)))
              .epsilon(1e-12));
  }
}

TEST_CASE("flat tabulated data dominates the wedges it contains") {
  const Environment env = scaled_env(64, 1.5, 23);
  std::vector<double> xs = {-0.5, 0.0, 0.5, 1.0};
  const InitialData flat =
      tabulated({0.0, 2.0}, {0.0, 0.0}, 0.4, 0.1, 0.0, 1.0);
  const SpatialProfile pf = h_profile(env, flat, xs);
  const SpatialProfile pw = h_profile(env, double_wedge(0.0, 1.0), xs);
  for (std::size_t c = 0; c < xs.size(); ++c) {
    CHECK(pf.h[c] + pf.level_shift >=
          pw.h[c] + pw.level_shift - 1e-12);
  }
}

TEST_CASE("profiles respect a parabolic envelope") {
  const Environment env = scaled_env(125, 2.0, 61);
  std::vector<double> xs;
  for (double x = -1.8; x <= 1.8; x += 0.1) xs.push_back(x);
  const InitialData h0 = narrow_wedge(0.0);
  const SpatialProfile prof = h_profile(env, h0, xs);
  const double slack = 1.0;
  const double b =
      *std::max_element(prof.h.begin(), prof.h.end()) + slack;
  const double curb = h0.gamma_ / (3.0 + h0.gamma_);
  for (std::size_t c = 0; c < xs.size(); ++c) {
    CHECK(prof.h[c] <= b - curb * prof.x_grid[c] * prof.x_grid[c]);
  }
}

TEST_CASE("profile errors") {
  const Environment env = scaled_env(27, 0.5, 5);
  CHECK_THROWS_AS(h_profile(env, narrow_wedge(0.0), {100.0}),
                  invalid_argument);
  // An off-centre wedge is recentred by the normalisation, not degenerate:
  // the reported frame shift carries the original position.
  const SpatialProfile far = h_profile(env, narrow_wedge(50.0), {0.0});
  CHECK(far.x_translation == doctest::Approx(-50.0));
  CHECK(std::isfinite(far.h[0]));
  // Support that maps beyond the sampled window is degenerate.
  const InitialData remote =
      tabulated({20.0, 21.0}, {0.0, 0.0}, 441.0, 1.0, 0.0, 21.0);
  CHECK_THROWS_AS(h_profile(env, remote, {0.0}), degenerate_input);
}

TEST_CASE("spacetime field: slices couple to the same environment") {
  const Environment env = scaled_env(64, 1.0, 29);
  std::vector<double> xs = {-0.5, 0.0, 0.5};
  const SpacetimeField f =
      h_spacetime(env, narrow_wedge(0.0), {0.25, 0.5, 1.0}, xs);
  const SpatialProfile full = h_profile(env, narrow_wedge(0.0), xs);
  for (std::size_t c = 0; c < xs.size(); ++c) {
    CHECK(f.h(2, static_cast<Eigen::Index>(c)) == full.h[c]);
  }
  const SpacetimeField again =
      h_spacetime(env, narrow_wedge(0.0), {0.25, 0.5, 1.0}, xs);
  CHECK(f.h == again.h);
  CHECK_THROWS_AS(h_spacetime(env, narrow_wedge(0.0), {1.5}, xs),
                  invalid_argument);
  CHECK_THROWS_AS(h_spacetime(env, narrow_wedge(0.0), {0.01}, xs),
                  invalid_argument);
}

TEST_CASE("near-maximizer search on canonical shapes") {
  SpatialProfile parabola;
  for (double x = -3.0; x <= 3.0; x += 0.05) {
    parabola.x_grid.push_back(x);
    parabola.h.push_back(-x * x);
  }
  const TPReport r1 = find_near_maximizers(parabola, 0.1, 1.0, 4.0, 0.9);
  CHECK_FALSE(r1.in_tp_set);
  CHECK(r1.pairs.empty());
  CHECK(r1.max_value == doctest::Approx(0.0).epsilon(1e-12));

  // Power-of-two step keeps the two maxima exact for the zero-tolerance run.
  SpatialProfile wells;
  for (int k = 0; k <= 64; ++k) {
    const double x = -1.0 + 0.0625 * k;
    wells.x_grid.push_back(x);
    const double d = std::min(std::abs(x), std::abs(x - 2.0));
    wells.h.push_back(-d * d);
  }
  const TPReport r2 = find_near_maximizers(wells, 0.01, 1.0, 4.0, 0.9);
  CHECK(r2.in_tp_set);
  REQUIRE_FALSE(r2.pairs.empty());
  CHECK(std::abs(r2.pairs.front().x1) < 0.1);
  CHECK(std::abs(r2.pairs.front().x2 - 2.0) < 0.1);
  CHECK(r2.pairs.front().deficit1 >= 0.0);

  // Strict zero tolerance keeps exact ties only.
  const TPReport r3 = find_near_maximizers(wells, 0.0, 1.0, 4.0, 0.9);
  CHECK(r3.in_tp_set);
  const TPReport r4 = find_near_maximizers(parabola, 0.0, 1.0, 4.0, 0.9);
  CHECK_FALSE(r4.in_tp_set);

  // A maximum value outside the sqrt window disqualifies membership.
  SpatialProfile tall = wells;
  for (double& v : tall.h) v += 10.0;
  CHECK_FALSE(find_near_maximizers(tall, 0.01, 1.0, 4.0, 0.9).in_tp_set);

  SpatialProfile empty;
  empty.x_grid = {10.0};
  empty.h = {1.0};
  CHECK_THROWS_AS(find_near_maximizers(empty, 0.1, 1.0, 4.0, 0.9),
                  degenerate_input);
}
