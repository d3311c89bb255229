#include "mortality/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mortality {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (prob < 0.0 || prob > 1.0) {
    throw std::invalid_argument("quantile probability outside [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

IntervalSummary summarize_95(std::span<const double> values) {
  IntervalSummary s;
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  std::vector<double> copy(values.begin(), values.end());
  std::sort(copy.begin(), copy.end());
  s.lower = quantile_type7(copy, 0.025);
  s.upper = quantile_type7(std::move(copy), 0.975);
  return s;
}

}  // namespace mortality
