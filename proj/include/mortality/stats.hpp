#pragma once

#include <span>
#include <vector>

namespace mortality {

// Pairwise (cascade) summation; the result depends only on element order.
double pairwise_sum(std::span<const double> values);

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `values` is copied and sorted.
double quantile_type7(std::vector<double> values, double prob);

struct IntervalSummary {
  double mean = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
};

IntervalSummary summarize_95(std::span<const double> values);

}  // namespace mortality
