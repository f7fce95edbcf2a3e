#pragma once

#include <cstdint>
#include <limits>

namespace kpzlab {

// xoshiro256++ with splitmix64 seeding. Self-contained so that every sampled
// byte is reproducible across platforms and standard-library versions; the
// std:: distributions are implementation-defined and never used.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on (0,1); never returns 0 so log(u) is always finite.
  double uniform() {
    std::uint64_t bits = next() >> 11;
    if (bits == 0) bits = 1;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  // Marsaglia polar method with one-deep cache.
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang, shape > 0.
  double gamma(double shape);

  // chi distribution with k degrees of freedom (k > 0, not necessarily int).
  double chi(double k);

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Counter-based replica seeding: independent streams for the same master seed
// and distinct indices, stable under any scheduling order.
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace kpzlab
