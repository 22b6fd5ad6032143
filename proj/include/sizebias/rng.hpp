#ifndef SIZEBIAS_RNG_HPP
#define SIZEBIAS_RNG_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace sizebias {

// Seeded random stream. Distribution helpers are hand-rolled on top of
// mt19937_64 so that identical seeds give identical draws on every platform;
// the std::* distributions make no such promise.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  // Independent stream derived from (seed, stream); used to give each
  // worker chunk its own reproducible source.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed) ^ mix(0x9e3779b97f4a7c15ULL + stream));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform on {0, ..., n-1}.
  long uniform_long(long n) {
    if (n <= 0) throw std::invalid_argument("uniform_long: n must be positive");
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<long>(x % un);
  }

  // Index into a normalized weight vector.
  std::size_t categorical(const std::vector<double>& weights) {
    double u = uniform(), acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace sizebias

#endif
