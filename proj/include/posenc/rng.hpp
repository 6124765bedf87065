#pragma once

// Deterministic RNG with a portable derivation layer.
//
// std::mt19937_64 produces a standard-specified stream for a given seed, but
// the standard distributions are implementation-defined, so the mappings from
// raw 64-bit draws to uniforms, bounded ints, and normals are spelled out here:
//   uniform()      top 53 bits scaled by 2^-53, in [0, 1)
//   uniform_open() same + 1 ulp shift, in (0, 1]
//   below(m)       rejection sampling on the high range, then modulo (unbiased)
//   normal()       Box-Muller on two uniforms, second value cached
// Any conforming implementation reproduces the same sequences bit for bit.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "errors.hpp"

namespace posenc {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  std::uint64_t below(std::uint64_t m) {
    require(m > 0, errc::invalid_argument, "below(0)");
    std::uint64_t threshold = (0 - m) % m; // 2^64 mod m
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % m;
    }
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double sigma) { return sigma * normal(); }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Fisher-Yates, swapping positions i and i + below(n - i) for i = 0..n-2.
inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(p[i], p[j]);
  }
  return p;
}

} // namespace posenc
