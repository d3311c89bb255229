#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mortality {

/// Seeded pseudo-random stream. All sampling in the library goes through an
/// Rng so that a chain is reproducible from its seed.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed);
  // Independent stream derived from several integers (e.g. seed, draw, k).
  Rng(std::initializer_list<std::uint64_t> key);

  double normal() { return normal_(engine_); }
  double normal(double mean, double variance);
  double uniform();  // in (0, 1)
  double gamma(double shape, double rate);

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_;
};

/// N(mean, variance) restricted to [lower, upper], by inversion of the
/// Gaussian CDF. Intervals lying entirely beyond ~37 standard deviations fall
/// back to exponential-proposal rejection.
double sample_truncated_normal(double mean, double variance, double lower,
                               double upper, Rng& rng);

/// IG(shape, scale): density proportional to x^{-shape-1} exp(-scale / x).
double sample_inverse_gamma(double shape, double scale, Rng& rng);

}  // namespace mortality
