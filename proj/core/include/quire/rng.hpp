#pragma once

#include <cstdint>

namespace quire {

/// Deterministic splittable RNG. Every run takes one root seed; independent
/// streams (trials, protocol phases) are derived with split(), never by
/// sharing a generator. The uniform double mapping is fixed here so output
/// files stay byte-identical across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {
    // warm up so nearby seeds decorrelate
    next_u64();
    next_u64();
  }

  uint64_t next_u64() {
    // splitmix64
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Child stream for e.g. one Monte Carlo trial.
  Rng split(uint64_t stream) {
    return Rng(next_base_ ^ (0xd1342543de82ef95ull * (stream + 1)) ^ root_mix());
  }

  /// Sample an index from unnormalized nonnegative weights.
  template <typename Container>
  int sample(const Container& weights) {
    double total = 0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0;
    int i = 0;
    for (double w : weights) {
      acc += w;
      if (u < acc) return i;
      ++i;
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  uint64_t root_mix() const { return state_ * 0x2545f4914f6cdd1dull; }
  uint64_t state_;
  uint64_t next_base_ = 0x6a09e667f3bcc909ull;
};

}  // namespace quire
