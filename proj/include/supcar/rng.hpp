#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace supcar {

// splitmix64 mixing step; whitens arbitrary 64-bit key material.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream: mt19937_64 plus fixed sampling algorithms.
// The transforms (Box-Muller, Knuth Poisson, Marsaglia-Tsang gamma) are
// pinned here rather than taken from std::*_distribution so that identical
// seeds give identical draws regardless of standard-library internals; the
// simulation's bit-reproducibility contract depends on that.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // Independent substream for a (path, atom) pair.  Nested mixing keeps
  // streams decorrelated for any assignment of paths to threads.
  static RngStream substream(std::uint64_t seed, std::uint64_t path,
                             std::uint64_t atom) {
    std::uint64_t key =
        splitmix64(seed ^ splitmix64(path ^ splitmix64(atom + 0x51ed2701ULL)));
    return RngStream(key);
  }

  // Uniform on the open interval (0,1): 53-bit mantissa, offset half an ulp.
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Poisson by Knuth's product method; means above 30 are split into chunks
  // (Poisson additivity) to avoid exp underflow.  Draw cost is O(mean).
  long poisson(double mean) {
    long n = 0;
    while (mean > 30.0) {
      n += poisson_knuth(30.0);
      mean -= 30.0;
    }
    return n + poisson_knuth(mean);
  }

  // Marsaglia-Tsang; shape < 1 boosted through gamma(shape+1) * U^{1/shape}.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = uniform01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v * scale;
    }
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  long poisson_knuth(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform01();
    while (prod > limit) {
      ++k;
      prod *= uniform01();
    }
    return k;
  }

  std::mt19937_64 gen_;
};

}  // namespace supcar
