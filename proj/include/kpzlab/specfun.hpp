#pragma once

namespace kpzlab {

struct AiryValue {
  double ai;
  double ai_prime;
};

// Ai and Ai' for real x; relative error <= 1e-10 on [-20, 10].
AiryValue airy(double x);

// Rate-two heat kernel p_ell(u) = (4*pi*ell)^{-1/2} exp(-u^2 / (4*ell)).
// ell must be > 0; the ell == 0 delta case is the caller's business.
double heat_kernel(double ell, double u);

struct EvalPoint {
  double t;
  double x;
  double z;
};

// Kernel of the group element exp{x d^2 + (t/3) d^3}:
//   t > 0:  t^{-1/3} exp(2x^3/3t^2 - zx/t) Ai(-t^{-1/3} z + t^{-4/3} x^2)
//   t < 0:  s_kernel(-t, x, -z)
//   t = 0:  heat_kernel(x, z) for x > 0; x = 0 is the identity (rejected).
double s_kernel(const EvalPoint& p);
inline double s_kernel(double t, double x, double z) {
  return s_kernel(EvalPoint{t, x, z});
}

// exp(G_t(u)) with G_t(u) = t^{-1/2} kappa sgn(u) |u|^{3/2}.
double gamma_weight(double t, double kappa, double u);

// log of the envelope dominating |s_kernel(1, x, .)|:
// F(x,z) = 2x^3/3 - xz - (2/3) max(x^2 - z, 0)^{3/2}.
double s_envelope_log(double x, double z);

// Standard normal CDF, accurate in both tails.
double normal_cdf(double x);

// Inverse of normal_cdf on (0, 1); p = 0 and p = 1 map to -inf / +inf.
double normal_quantile(double p);

}  // namespace kpzlab
