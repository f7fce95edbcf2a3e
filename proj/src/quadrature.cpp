#include "kpzlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "kpzlab/common.hpp"

namespace kpzlab {

namespace {

std::mutex g_cache_mutex;
std::map<int, QuadratureRule>& cache() {
  static std::map<int, QuadratureRule> c;
  return c;
}

QuadratureRule compute_reference(int q) {
  // Golub-Welsch: Jacobi matrix of the Legendre recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd sub(q - 1);
  for (int k = 1; k < q; ++k) {
    sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw numeric_failure("gauss_legendre: eigen decomposition failed");
  }
  QuadratureRule rule;
  rule.a = -1.0;
  rule.b = 1.0;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int q) {
  if (q < 1) throw invalid_argument("gauss_legendre: order must be >= 1");
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = cache().find(q);
  if (it == cache().end()) {
    it = cache().emplace(q, compute_reference(q)).first;
  }
  return it->second;
}

QuadratureRule gauss_legendre(int q, double a, double b) {
  if (!(a < b)) throw invalid_argument("gauss_legendre: need a < b");
  QuadratureRule ref = gauss_legendre(q);
  QuadratureRule rule;
  rule.a = a;
  rule.b = b;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  rule.nodes = (ref.nodes.array() * half + mid).matrix();
  rule.weights = ref.weights * half;
  return rule;
}

QuadratureRule half_line_exp(int q, double a, double scale) {
  if (!(scale > 0.0)) throw invalid_argument("half_line_exp: scale must be > 0");
  QuadratureRule base = gauss_legendre(q, 0.0, 1.0);
  QuadratureRule rule;
  rule.a = a;
  rule.b = std::numeric_limits<double>::infinity();
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    const double s = base.nodes[i];
    rule.nodes[i] = a - scale * std::log1p(-s);
    rule.weights[i] = base.weights[i] * scale / (1.0 - s);
  }
  return rule;
}

}  // namespace kpzlab
