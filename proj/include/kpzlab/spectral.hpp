#pragma once

#include <vector>

#include "kpzlab/rng.hpp"

namespace kpzlab {

// Symmetric tridiagonal matrix; off.size() == diag.size() - 1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;
};

// Tridiagonal model whose spectrum has the law of the classical Gaussian
// ensemble: beta = 1 orthogonal (diagonal variance two, off-diagonal
// variance one), beta = 2 unitary (diagonal variance one, complex
// off-diagonal variance one). Sampling is O(n).
Tridiagonal sample_gaussian_tridiagonal(int n, int beta, Rng& rng);

// Number of eigenvalues strictly below x, by the Sturm/LDL sign count.
int eigenvalues_below(const Tridiagonal& t, double x);

// Largest eigenvalue, bisected inside the Gershgorin bounds.
double top_eigenvalue(const Tridiagonal& t, double tol = 1e-11);

// Centred and scaled edge sample n^{1/6} (lambda_max - 2 sqrt(n)). For
// beta = 2 this has the law of the scaled passage value S_n(0, 0) at every
// finite n, with no time discretization; for beta = 1 it converges to the
// law of the globally maximized narrow-wedge profile (up to the 4^{1/3}
// argument scaling).
double sample_edge_value(int n, int beta, Rng& rng);

}  // namespace kpzlab
