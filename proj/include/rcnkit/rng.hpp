#pragma once

#include <cmath>
#include <cstdint>

namespace rcnkit {

// Deterministic splittable generator (splitmix64). Every random decision in
// the toolkit flows from one seeded root; worker lanes get independent
// streams via split(), so results are identical for any thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Independent child stream; does not disturb this generator's sequence.
  Rng split(std::uint64_t stream) const {
    Rng mix(state_ ^ (0xa0761d6478bd642fULL + stream * 0xe7037ed1a0b428dbULL));
    mix.next_u64();
    return Rng(mix.next_u64());
  }

  double uniform01() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), n >= 1.
  int uniform_int(int n) { return static_cast<int>(uniform01() * n); }

  // Uniform integer in [lo, hi], inclusive; lo > hi collapses to lo.
  int uniform_int(int lo, int hi) {
    if (hi <= lo) {
      next_u64();  // keep the draw count independent of the range
      return lo;
    }
    return lo + uniform_int(hi - lo + 1);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller, cacheless so streams stay reproducible after split().
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(6.283185307179586 * u2);
  }

  float normalf(float mean, float stddev) {
    return mean + stddev * static_cast<float>(normal());
  }

 private:
  std::uint64_t state_;
};

}  // namespace rcnkit
