#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "subsketch/errors.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

// splitmix64 mixing step; used to derive independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for (cell, trial) of an experiment. All parallel trials use
// seeds derived this way, so results do not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(base ^ 0x243f6a8885a308d3ULL);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

// Deterministic random source. The engine is std::mt19937_64 (whose output
// sequence is fixed by the standard); all distributions are implemented here
// rather than with std:: distribution classes, which are
// implementation-defined and would break bit-reproducibility across
// standard libraries.
//
// Draw order is part of the reproducibility contract: every generator method
// documents exactly how many engine words it consumes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // One engine word.
  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n); rejection sampling, >= 1 engine word.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidDim("Rng::below: n must be positive");
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= bound);
    return x % n;
  }

  // Uniform in [0, 1) with 53-bit resolution; one engine word.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes exactly two engine words.
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circular complex normal CN(0, variance); exactly two engine words.
  Complex cgaussian(double variance) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log1p(-u1));
    return std::polar(r, 2.0 * std::numbers::pi * u2);
  }

  // Uniformly random m-subset of {0, ..., M-1}, ascending (selection
  // sampling over indices in increasing order; at most M engine words).
  std::vector<int> subset(int m, int M) {
    if (m < 0 || m > M) throw InvalidDim("Rng::subset: need 0 <= m <= M");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(m));
    int need = m;
    for (int i = 0; i < M && need > 0; ++i) {
      const int left = M - i;
      if (below(static_cast<std::uint64_t>(left)) <
          static_cast<std::uint64_t>(need)) {
        out.push_back(i);
        --need;
      }
    }
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace subsketch
