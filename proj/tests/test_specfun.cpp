#include "kpzlab/specfun.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "kpzlab/common.hpp"

using namespace kpzlab;

namespace {
struct AiryRef {
  double x, ai, aip;
};
const AiryRef kAiryTable[] = {
#include "data/airy_reference.inc"
};
}  // namespace

TEST_CASE("airy matches reference table to 1e-10 relative") {
  for (const auto& ref : kAiryTable) {
    const AiryValue v = airy(ref.x);
    CAPTURE(ref.x);
    if (std::abs(ref.ai) > 1e-8) {
      CHECK(std::abs(v.ai - ref.ai) <= 1e-10 * std::abs(ref.ai));
    } else {
      // Near a zero of Ai the relative target is vacuous; check phase-level
      // absolute accuracy instead.
      CHECK(std::abs(v.ai - ref.ai) <= 1e-13);
    }
    if (std::abs(ref.aip) > 1e-8) {
      CHECK(std::abs(v.ai_prime - ref.aip) <= 1e-10 * std::abs(ref.aip));
    } else {
      CHECK(std::abs(v.ai_prime - ref.aip) <= 1e-13);
    }
  }
}

TEST_CASE("airy pinned values at zero") {
  const AiryValue v = airy(0.0);
  CHECK(v.ai == doctest::Approx(0.3550280538878172).epsilon(1e-14));
  CHECK(v.ai_prime == doctest::Approx(-0.2588194037928068).epsilon(1e-14));
}

TEST_CASE("airy decay direction at x = 10") {
  const double bound = std::exp(-(2.0 / 3.0) * std::pow(10.0, 1.5));
  CHECK(airy(10.0).ai > 0.0);
  CHECK(airy(10.0).ai <= bound);  // prefactor < 1 already at x = 10
}

TEST_CASE("airy rejects non-finite input") {
  CHECK_THROWS_AS(airy(std::nan("")), invalid_argument);
  CHECK_THROWS_AS(airy(INFINITY), invalid_argument);
}

TEST_CASE("airy satisfies the ODE via central differences") {
  const double h = 1e-4;
  for (double x = -10.0; x <= 5.0; x += 0.37) {
    const double second =
        (airy(x + h).ai - 2.0 * airy(x).ai + airy(x - h).ai) / (h * h);
    const double rhs = x * airy(x).ai;
    // finite-difference truncation ~ h^2 * Ai'''' limits this to ~1e-7
    CHECK(std::abs(second - rhs) <=
          1e-6 * std::max(1.0, std::abs(rhs)) + 1e-6);
  }
}

TEST_CASE("airy derivative consistent with finite differences") {
  const double h = 1e-5;
  for (double x = -12.0; x <= 8.0; x += 0.61) {
    const double fd = (airy(x + h).ai - airy(x - h).ai) / (2.0 * h);
    CHECK(airy(x).ai_prime ==
          doctest::Approx(fd).epsilon(1e-7).scale(std::max(1.0, std::abs(fd))));
  }
}

TEST_CASE("heat kernel pinned values and normalization") {
  CHECK(heat_kernel(1.0, 0.0) == doctest::Approx(0.28209479177).epsilon(1e-10));
  CHECK(heat_kernel(1.0, 2.0) == doctest::Approx(0.10377687435).epsilon(1e-9));
  double mass = 0.0;
  const double h = 0.01;
  for (double u = -12.0; u <= 12.0; u += h) mass += heat_kernel(1.0, u) * h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(heat_kernel(0.37, 1.234) == heat_kernel(0.37, -1.234));
  CHECK_THROWS_AS(heat_kernel(0.0, 1.0), invalid_argument);
  CHECK_THROWS_AS(heat_kernel(-1.0, 1.0), invalid_argument);
}

TEST_CASE("s_kernel specializations") {
  CHECK(s_kernel(1.0, 0.0, 0.0) ==
        doctest::Approx(0.3550280538878172).epsilon(1e-12));
  for (double z = -3.0; z <= 3.0; z += 0.7) {
    CHECK(s_kernel(1.0, 0.0, z) ==
          doctest::Approx(airy(-z).ai).epsilon(1e-12));
  }
  // t = 0 degenerates to the heat kernel for x > 0
  CHECK(s_kernel(0.0, 0.8, 0.3) ==
        doctest::Approx(heat_kernel(0.8, 0.3)).epsilon(1e-13));
  CHECK_THROWS_AS(s_kernel(0.0, 0.0, 1.0), invalid_argument);
  CHECK_THROWS_AS(s_kernel(0.0, -1.0, 1.0), invalid_argument);
}

TEST_CASE("s_kernel negative-time reflection") {
  for (double z = -2.0; z <= 2.0; z += 0.5) {
    CHECK(s_kernel(-1.0, 0.4, z) ==
          doctest::Approx(s_kernel(1.0, 0.4, -z)).epsilon(1e-13));
  }
}

TEST_CASE("s_kernel dominated by the growth envelope") {
  for (double x = -5.0; x <= 5.0; x += 0.5) {
    for (double z = -5.0; z <= 5.0; z += 0.5) {
      const double v = std::abs(s_kernel(1.0, x, z));
      CAPTURE(x);
      CAPTURE(z);
      CHECK(v <= 10.0 * std::exp(s_envelope_log(x, z)));
    }
  }
}

TEST_CASE("s_kernel semigroup under numerical convolution") {
  const double s = 0.5, t = 0.5, x = 0.6, y = 0.6;
  const double h = 0.02;
  for (double d = -2.0; d <= 2.0; d += 0.27) {  // d = u - v
    double conv = 0.0;
    for (double w = -25.0; w <= 25.0; w += h) {
      conv += s_kernel(s, x, d - w) * s_kernel(t, y, w) * h;
    }
    CHECK(std::abs(conv - s_kernel(s + t, x + y, d)) <= 1e-6);
  }
}

TEST_CASE("gamma weight basics") {
  CHECK(gamma_weight(0.5, 0.05, 0.0) == 1.0);
  CHECK(gamma_weight(1.0, 0.1, 4.0) == doctest::Approx(std::exp(0.8)).epsilon(1e-13));
  for (double u = -3.0; u <= 3.0; u += 0.7) {
    CHECK(gamma_weight(2.0, 0.3, u) * gamma_weight(2.0, 0.3, -u) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gamma_weight(0.0, 0.1, 1.0), invalid_argument);
  CHECK_THROWS_AS(gamma_weight(1.0, 0.0, 1.0), invalid_argument);
}

TEST_CASE("normal cdf and quantile invert each other") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
  for (double x = -6.0; x <= 6.0; x += 0.83)
    CHECK(normal_cdf(x) + normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.9750021048517795) ==
        doctest::Approx(1.96).epsilon(1e-9));
  for (double p : {1e-12, 1e-6, 0.02, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10}) {
    const double q = normal_quantile(p);
    CHECK(normal_cdf(q) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK(normal_quantile(0.0) == -std::numeric_limits<double>::infinity());
  CHECK(normal_quantile(1.0) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(normal_quantile(-0.1), invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.1), invalid_argument);
  CHECK_THROWS_AS(normal_quantile(std::numeric_limits<double>::quiet_NaN()),
                  invalid_argument);
}
