#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace wiretap {

// Deterministic, splittable randomness. The mt19937_64 output sequence is
// pinned by the standard, and all transforms below are hand-rolled, so equal
// seeds give bit-identical draws on any conforming platform. split() derives
// an independent stream from (seed, stream-id) without consuming draws.
class Rng {
public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  uint64_t seed() const { return seed_; }

  Rng split(uint64_t stream) const {
    return Rng(mix(mix(seed_) ^ (stream + 0x9e3779b97f4a7c15ULL)));
  }

  uint64_t next_u64() { return engine_(); }

  // uniform on [0,1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on {0, ..., n-1}, rejection sampled (no modulo bias)
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: empty range");
    uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return draw % n;
  }

  // index sampled from cumulative inverse of the given weights (must sum ~1)
  int sample(std::span<const double> probs) {
    double u = uniform01();
    double acc = 0.0;
    int last = 0;
    for (size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      last = static_cast<int>(i);
      if (u < acc) return last;
    }
    return last;  // u landed in residual rounding mass
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  static uint64_t mix(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace wiretap
