#include "airq/analytics/regression.hpp"

#include <algorithm>
#include <cmath>

#include "airq/error.hpp"

namespace airq::analytics {

RegressionModel fit_linear_regression(std::span<const Sample2D> samples) {
  const std::size_t n = samples.size();
  if (n < 2) fail(ErrorCode::kInsufficientData, "linear regression needs at least 2 samples");
  for (const auto& s : samples)
    if (!std::isfinite(s.x) || !std::isfinite(s.y))
      fail(ErrorCode::kInvalidParameter, "sample coordinates must be finite");

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& s : samples) {
    mean_x += s.x;
    mean_y += s.y;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  // Centered sums keep cancellation error small for offset data.
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& s : samples) {
    const double dx = s.x - mean_x;
    const double dy = s.y - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const bool all_x_equal = std::all_of(samples.begin(), samples.end(),
                                       [&](const Sample2D& s) { return s.x == samples[0].x; });
  if (all_x_equal || sxx == 0.0)
    fail(ErrorCode::kDegenerateData, "linear regression needs at least two distinct x values");

  RegressionModel m;
  m.n = n;
  m.slope = sxy / sxx;
  m.intercept = mean_y - m.slope * mean_x;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (const auto& s : samples) {
      const double r = s.y - predict(m, s.x);
      ss_res += r * r;
    }
    m.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return m;
}

double predict(const RegressionModel& model, double x) { return model.slope * x + model.intercept; }

}  // namespace airq::analytics
