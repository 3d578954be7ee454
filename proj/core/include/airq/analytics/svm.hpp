#pragma once

#include <array>
#include <span>
#include <vector>

#include "airq/analytics/sample.hpp"

namespace airq::analytics {

// Linear soft-margin SVM: f(x) = w . x + b, labels SAFE = +1, UNSAFE = -1.
struct SvmModel {
  std::array<double, 2> w{0.0, 0.0};
  double b = 0.0;
  std::vector<double> alphas;  // one per training sample, 0 <= alpha <= c
  double c = 1.0;
  double tol = 1e-3;
  bool converged = false;
  int iterations = 0;  // outer SMO passes

  double decision(double x, double y) const { return w[0] * x + w[1] * y + b; }
};

struct SvmParams {
  double c = 1.0;
  double tol = 1e-3;
  int max_iter = 10000;
};

// Sequential minimal optimisation with deterministic (ordered) pair selection.
// Throws kDegenerateData when only one class is present, kInvalidParameter for
// c <= 0 or unlabeled samples. Running out of passes returns the current
// iterate with converged = false.
SvmModel fit_svm(std::span<const Sample2D> samples, SvmParams params = {});

Label predict(const SvmModel& model, const Sample2D& point);

// Largest KKT violation over the training set, in units of y_i f(x_i):
//   alpha = 0     : max(0, 1 - y f)
//   0 < alpha < C : |y f - 1|
//   alpha = C     : max(0, y f - 1)
double max_kkt_violation(const SvmModel& model, std::span<const Sample2D> samples);

}  // namespace airq::analytics
