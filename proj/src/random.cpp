#include "mortality/random.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mortality {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng::Rng(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  for (auto k : key) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double Rng::normal(double mean, double variance) {
  return mean + std::sqrt(variance) * normal_(engine_);
}

double Rng::uniform() {
  double u;
  do {
    u = std::generate_canonical<double, 53>(engine_);
  } while (u <= 0.0);
  return u;
}

double Rng::gamma(double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

namespace {

const boost::math::normal_distribution<double> kStdNormal;

// Standard normal restricted to [lo, hi] with lo >= c > 0 far in the tail.
double upperTailRejection(double lo, double hi, Rng& rng) {
  const double rate = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  for (;;) {
    const double z = lo - std::log(rng.uniform()) / rate;
    if (z > hi) continue;
    const double diff = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * diff * diff)) return z;
  }
}

// Standard normal on [a, b] with b <= 0 or a <= 0 <= b (the accurate side of
// the CDF).
double lowerSideInversion(double a, double b, Rng& rng) {
  const double pa = std::isinf(a) ? 0.0 : boost::math::cdf(kStdNormal, a);
  const double pb = std::isinf(b) ? 1.0 : boost::math::cdf(kStdNormal, b);
  if (!(pb > pa)) {
    // Both bounds too deep in the lower tail for double precision.
    return -upperTailRejection(-b, -a, rng);
  }
  for (;;) {
    const double u = pa + rng.uniform() * (pb - pa);
    if (u <= 0.0 || u >= 1.0) continue;
    const double z = boost::math::quantile(kStdNormal, u);
    return std::clamp(z, a, b);
  }
}

}  // namespace

double sample_truncated_normal(double mean, double variance, double lower,
                               double upper, Rng& rng) {
  if (!(variance > 0) || !(upper > lower)) {
    throw std::invalid_argument("truncated normal needs variance > 0 and a "
                                "non-empty interval");
  }
  const double sd = std::sqrt(variance);
  const double a = (lower - mean) / sd;
  const double b = (upper - mean) / sd;
  double z;
  if (a > 0.0) {
    z = -lowerSideInversion(-b, -a, rng);
  } else {
    z = lowerSideInversion(a, b, rng);
  }
  return std::clamp(mean + sd * z, lower, upper);
}

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  if (!(shape > 0) || !(scale > 0)) {
    throw std::invalid_argument("inverse gamma needs positive shape and scale");
  }
  return 1.0 / rng.gamma(shape, scale);
}

}  // namespace mortality
