#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace cqarank {

/// Seeded generator shared by every stochastic stage. The bit-level helpers
/// below avoid the implementation-defined std distributions on the hot paths
/// so sampling histories are stable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Index drawn proportionally to non-negative masses; total must be > 0.
  std::size_t categorical(std::span<const double> masses, double total) {
    double u = uniform01() * total;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      u -= masses[i];
      if (u < 0.0) return i;
    }
    // Rounding residue: return the last index with positive mass.
    for (std::size_t i = masses.size(); i-- > 0;) {
      if (masses[i] > 0.0) return i;
    }
    return masses.size() - 1;
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

  /// Symmetric or asymmetric Dirichlet draw written into `out`.
  void dirichlet(std::span<const double> concentration, std::span<double> out) {
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = gamma(concentration[i]);
      total += out[i];
    }
    if (total <= 0.0) {
      // All draws underflowed: fall back to a random vertex.
      for (double& v : out) v = 0.0;
      out[uniform_index(out.size())] = 1.0;
      return;
    }
    for (double& v : out) v /= total;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derive an independent stream seed from a base seed and a salt.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cqarank
