#pragma once

#include <optional>
#include <span>

#include "airq/analytics/sample.hpp"

namespace airq::analytics {

// Ordinary least squares fit of humidity (y) on temperature (x).
struct RegressionModel {
  double slope = 0.0;
  double intercept = 0.0;
  // Empty when the target has zero variance (R^2 undefined).
  std::optional<double> r_squared;
  std::size_t n = 0;
};

// Throws kInsufficientData for n < 2 and kDegenerateData when every x is equal.
RegressionModel fit_linear_regression(std::span<const Sample2D> samples);

double predict(const RegressionModel& model, double x);

}  // namespace airq::analytics
