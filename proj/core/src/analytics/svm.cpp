#include "airq/analytics/svm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "airq/error.hpp"

namespace airq::analytics {
namespace {

// Minimum relative change of an alpha for a pair update to count as progress.
constexpr double kStepEps = 1e-10;

class SmoSolver {
 public:
  SmoSolver(std::span<const Sample2D> samples, const SvmParams& params)
      : samples_(samples), c_(params.c), tol_(params.tol), alpha_(samples.size(), 0.0) {
    y_.reserve(samples.size());
    for (const auto& s : samples) y_.push_back(sign_of(*s.label));
  }

  SvmModel solve(int max_iter) {
    const std::size_t n = samples_.size();
    std::size_t changed = 0;
    bool examine_all = true;
    int passes = 0;
    bool exhausted = false;
    while (changed > 0 || examine_all) {
      if (passes >= max_iter) {
        exhausted = true;
        break;
      }
      ++passes;
      changed = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (examine_all || !at_bound(i)) changed += examine(i) ? 1 : 0;
      if (examine_all)
        examine_all = false;
      else if (changed == 0)
        examine_all = true;
    }

    SvmModel m;
    m.alphas = alpha_;
    m.c = c_;
    m.tol = tol_;
    m.iterations = passes;
    m.w = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      m.w[0] += alpha_[i] * y_[i] * samples_[i].x;
      m.w[1] += alpha_[i] * y_[i] * samples_[i].y;
    }
    // Re-derive the bias from free support vectors when there are any; it is
    // better conditioned than the incrementally updated value.
    double sum = 0.0;
    std::size_t free = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (at_bound(i)) continue;
      sum += y_[i] - (m.w[0] * samples_[i].x + m.w[1] * samples_[i].y);
      ++free;
    }
    m.b = free > 0 ? sum / static_cast<double>(free) : b_;
    m.converged = !exhausted && max_kkt_violation(m, samples_) <= tol_;
    return m;
  }

 private:
  double kernel(std::size_t i, std::size_t j) const {
    return samples_[i].x * samples_[j].x + samples_[i].y * samples_[j].y;
  }
  double output(std::size_t i) const { return w_[0] * samples_[i].x + w_[1] * samples_[i].y + b_; }
  double error(std::size_t i) const { return output(i) - y_[i]; }
  bool at_bound(std::size_t i) const { return alpha_[i] <= 0.0 || alpha_[i] >= c_; }

  bool examine(std::size_t i2) {
    const double e2 = error(i2);
    const double r2 = e2 * y_[i2];
    if (!((r2 < -tol_ && alpha_[i2] < c_) || (r2 > tol_ && alpha_[i2] > 0))) return false;

    const std::size_t n = samples_.size();
    // Second-choice heuristic: free alpha with the largest |E1 - E2|.
    std::optional<std::size_t> pick;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (at_bound(i)) continue;
      const double gap = std::abs(error(i) - e2);
      if (gap > best) {
        best = gap;
        pick = i;
      }
    }
    if (pick && take_step(*pick, i2)) return true;
    for (std::size_t i = 0; i < n; ++i)
      if (!at_bound(i) && take_step(i, i2)) return true;
    for (std::size_t i = 0; i < n; ++i)
      if (take_step(i, i2)) return true;
    return false;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1];
    const double a2 = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double e1 = error(i1);
    const double e2 = error(i2);
    const double s = y1 * y2;

    double lo;
    double hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_);
      hi = std::min(c_, a1 + a2);
    }
    if (lo >= hi) return false;

    const double k11 = kernel(i1, i1);
    const double k12 = kernel(i1, i2);
    const double k22 = kernel(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2_new;
    if (eta > 0) {
      a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Degenerate pair (identical points): evaluate the objective at both ends.
      const double f1 = y1 * (e1 - b_) - a1 * k11 - s * a2 * k12;
      const double f2 = y2 * (e2 - b_) - s * a1 * k12 - a2 * k22;
      const double l1 = a1 + s * (a2 - lo);
      const double h1 = a1 + s * (a2 - hi);
      const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                            s * lo * l1 * k12;
      const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                            s * hi * h1 * k12;
      if (obj_lo < obj_hi - kStepEps)
        a2_new = lo;
      else if (obj_lo > obj_hi + kStepEps)
        a2_new = hi;
      else
        a2_new = a2;
    }
    if (std::abs(a2_new - a2) < kStepEps * (a2_new + a2 + kStepEps)) return false;

    double a1_new = a1 + s * (a2 - a2_new);
    a1_new = std::clamp(a1_new, 0.0, c_);

    const double d1 = y1 * (a1_new - a1);
    const double d2 = y2 * (a2_new - a2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    if (a1_new > 0 && a1_new < c_)
      b_ = b1;
    else if (a2_new > 0 && a2_new < c_)
      b_ = b2;
    else
      b_ = (b1 + b2) / 2.0;

    w_[0] += d1 * samples_[i1].x + d2 * samples_[i2].x;
    w_[1] += d1 * samples_[i1].y + d2 * samples_[i2].y;
    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    return true;
  }

  std::span<const Sample2D> samples_;
  double c_;
  double tol_;
  std::vector<double> alpha_;
  std::vector<double> y_;
  std::array<double, 2> w_{0.0, 0.0};
  double b_ = 0.0;
};

}  // namespace

SvmModel fit_svm(std::span<const Sample2D> samples, SvmParams params) {
  if (!(params.c > 0) || !std::isfinite(params.c))
    fail(ErrorCode::kInvalidParameter, "box constraint c must be > 0", {"c"});
  if (!(params.tol > 0)) fail(ErrorCode::kInvalidParameter, "tol must be > 0", {"tol"});
  if (params.max_iter < 1) fail(ErrorCode::kInvalidParameter, "max_iter must be >= 1", {"max_iter"});
  bool has_safe = false;
  bool has_unsafe = false;
  for (const auto& s : samples) {
    if (!s.label) fail(ErrorCode::kInvalidParameter, "SVM samples must be labeled", {"label"});
    if (!std::isfinite(s.x) || !std::isfinite(s.y))
      fail(ErrorCode::kInvalidParameter, "sample coordinates must be finite");
    (*s.label == Label::kSafe ? has_safe : has_unsafe) = true;
  }
  if (!has_safe || !has_unsafe)
    fail(ErrorCode::kDegenerateData, "SVM training data must contain both SAFE and UNSAFE samples");
  return SmoSolver(samples, params).solve(params.max_iter);
}

Label predict(const SvmModel& model, const Sample2D& point) {
  return label_of_sign(model.decision(point.x, point.y));
}

double max_kkt_violation(const SvmModel& model, std::span<const Sample2D> samples) {
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double yf = sign_of(*samples[i].label) * model.decision(samples[i].x, samples[i].y);
    const double a = model.alphas.at(i);
    double v;
    if (a <= 0.0)
      v = std::max(0.0, 1.0 - yf);
    else if (a >= model.c)
      v = std::max(0.0, yf - 1.0);
    else
      v = std::abs(yf - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace airq::analytics
