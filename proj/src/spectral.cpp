#include "kpzlab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "kpzlab/common.hpp"

namespace kpzlab {

Tridiagonal sample_gaussian_tridiagonal(int n, int beta, Rng& rng) {
  if (n < 1) throw invalid_argument("matrix size must be positive");
  if (beta != 1 && beta != 2) throw invalid_argument("beta must be 1 or 2");
  const double root_beta = std::sqrt(static_cast<double>(beta));
  Tridiagonal t;
  t.diag.resize(n);
  t.off.resize(n - 1);
  for (int i = 0; i < n; ++i) {
    t.diag[i] = rng.normal() * std::sqrt(2.0) / root_beta;
  }
  for (int k = 0; k + 1 < n; ++k) {
    t.off[k] = rng.chi(static_cast<double>(beta * (n - 1 - k))) / root_beta;
  }
  return t;
}

int eigenvalues_below(const Tridiagonal& t, double x) {
  const std::size_t n = t.diag.size();
  if (n == 0 || t.off.size() + 1 != n) {
    throw invalid_argument("malformed tridiagonal");
  }
  int count = 0;
  double q = t.diag[0] - x;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    if (q == 0.0) q = -1e-300;  // IEEE division recovers on the next step
    q = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

double top_eigenvalue(const Tridiagonal& t, double tol) {
  const std::size_t n = t.diag.size();
  if (n == 0 || t.off.size() + 1 != n) {
    throw invalid_argument("malformed tridiagonal");
  }
  double lo = t.diag[0], hi = t.diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) +
                     (i + 1 < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double span = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  while (hi - lo > tol * span) {
    const double mid = 0.5 * (lo + hi);
    if (eigenvalues_below(t, mid) == static_cast<int>(n)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double sample_edge_value(int n, int beta, Rng& rng) {
  const Tridiagonal t = sample_gaussian_tridiagonal(n, beta, rng);
  const double nd = static_cast<double>(n);
  return std::pow(nd, 1.0 / 6.0) * (top_eigenvalue(t) - 2.0 * std::sqrt(nd));
}

}  // namespace kpzlab
