#pragma once

#include <vector>

#include "ruin/kernels.hpp"

namespace ruin {

struct WeightedKernel {
  double weight = 1.0;
  KernelSpec kernel;
};

// Weighted sum of independent centered Gaussian components, minus a trend,
// observed on [0, horizon].
struct AggregateModel {
  std::vector<WeightedKernel> components;
  Trend trend = Trend::linear(0.0);
  double horizon = 1.0;

  void validate() const;
  double trend_at_horizon() const { return trend.at(horizon); }
  // Covariance of the aggregate at (s, t): sum of weight^2 * component cov.
  double cov(double s, double t) const;
  double variance(double t) const { return cov(t, t); }
};

}  // namespace ruin
