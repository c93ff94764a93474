#pragma once

// Seeded randomness and byte hashing.
//
// Every stochastic step in the pipeline (data synthesis, parameter init,
// epoch shuffling) pulls from an Rng seeded through derive_seed(), so one
// master seed fans out into independent, order-insensitive streams and a
// rerun with the same seed reproduces every draw bit for bit. Distribution
// shaping is done here from raw mt19937_64 output instead of through
// std::*_distribution, whose sequences are implementation-defined.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>

namespace mmgf {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(const void* bytes, size_t n,
                        uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s,
                        uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

// Independent stream seed for (master, tag, index).
inline uint64_t derive_seed(uint64_t master, std::string_view tag,
                            uint64_t index = 0) {
  uint64_t h = fnv1a64(tag);
  h = splitmix64(h ^ master);
  return splitmix64(h ^ (index * 0x9e3779b97f4a7c15ull + 1));
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * static_cast<double>(n));
  }

  // Box-Muller from two fresh uniforms; no cached second value so the draw
  // count per call is fixed.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double exponential(double rate) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(u) / rate;
  }

  // Lognormal parameterized by the mean/stddev of the *resulting* variable
  // (moment matching), not of the underlying normal.
  double lognormal_matched(double mean, double stddev) {
    const double sigma2 = std::log(1.0 + (stddev * stddev) / (mean * mean));
    const double mu = std::log(mean) - 0.5 * sigma2;
    return std::exp(mu + std::sqrt(sigma2) * normal());
  }

  // Fisher-Yates shuffle, uniform over permutations.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mmgf
