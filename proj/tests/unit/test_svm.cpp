#include <doctest.h>

#include <cmath>
#include <random>

#include "airq/analytics/svm.hpp"
#include "airq/error.hpp"

using namespace airq;
using namespace airq::analytics;
using airq::salubrity::Label;

namespace {

constexpr auto S = Label::kSafe;
constexpr auto U = Label::kUnsafe;

double dual_sum(const SvmModel& m, const std::vector<Sample2D>& s) {
  double sum = 0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += m.alphas[i] * sign_of(*s[i].label);
  return sum;
}

// KKT residual recomputed from the definitions, independent of the library helper.
double kkt(const SvmModel& m, const std::vector<Sample2D>& s) {
  double worst = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double yf = sign_of(*s[i].label) * m.decision(s[i].x, s[i].y);
    const double a = m.alphas[i];
    double v = 0;
    if (a <= 1e-12) {
      v = std::max(0.0, 1 - yf);
    } else if (a >= m.c - 1e-12) {
      v = std::max(0.0, yf - 1);
    } else {
      v = std::fabs(yf - 1);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

TEST_CASE("two point hard margin") {
  const std::vector<Sample2D> s{{-1, 0, U}, {1, 0, S}};
  const auto m = fit_svm(s, {1000.0, 1e-6, 10000});
  CHECK(m.converged);
  CHECK(std::fabs(m.w[0] - 1) < 1e-3);
  CHECK(std::fabs(m.w[1]) < 1e-3);
  CHECK(std::fabs(m.b) < 1e-3);
  CHECK(1 / std::hypot(m.w[0], m.w[1]) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::fabs(dual_sum(m, s)) < 1e-8);
}

TEST_CASE("w is the alpha-weighted sum of the samples") {
  const std::vector<Sample2D> s{{0, 0, U}, {1, 0, U}, {3, 3, S}, {4, 2, S}, {0.5, 2.5, U}};
  const auto m = fit_svm(s, {10.0, 1e-4, 10000});
  double wx = 0, wy = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    wx += m.alphas[i] * sign_of(*s[i].label) * s[i].x;
    wy += m.alphas[i] * sign_of(*s[i].label) * s[i].y;
  }
  CHECK(m.w[0] == doctest::Approx(wx).epsilon(1e-12));
  CHECK(m.w[1] == doctest::Approx(wy).epsilon(1e-12));
}

TEST_CASE("separable four points are classified perfectly") {
  const std::vector<Sample2D> s{{18, 35, S}, {22, 45, S}, {30, 75, U}, {33, 80, U}};
  const auto m = fit_svm(s, {100.0, 1e-4, 20000});
  CHECK(m.converged);
  for (const auto& p : s) CHECK(predict(m, p) == *p.label);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (m.alphas[i] == 0) CHECK(sign_of(*s[i].label) * m.decision(s[i].x, s[i].y) >= 1 - m.tol);
}

TEST_CASE("predict uses the sign of the decision value") {
  SvmModel m;
  m.w = {1, 0};
  m.b = 0;
  CHECK(predict(m, {-2, 5, std::nullopt}) == U);
  CHECK(predict(m, {2, 5, std::nullopt}) == S);
  CHECK(predict(m, {0, 5, std::nullopt}) == S);
}

TEST_CASE("errors") {
  const std::vector<Sample2D> one_class{{1, 1, S}, {2, 2, S}};
  try {
    fit_svm(one_class);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateData);
  }
  const std::vector<Sample2D> s{{-1, 0, U}, {1, 0, S}};
  CHECK_THROWS_AS(fit_svm(s, {0.0, 1e-3, 100}), Error);
  const std::vector<Sample2D> unlabeled{{-1, 0, U}, {1, 0, std::nullopt}};
  CHECK_THROWS_AS(fit_svm(unlabeled), Error);
}

TEST_CASE("iteration budget exhaustion is reported, not thrown") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  std::vector<Sample2D> s;
  for (int i = 0; i < 60; ++i) s.push_back({n(rng), n(rng), i % 2 ? S : U});
  const auto m = fit_svm(s, {1.0, 1e-3, 1});
  CHECK(m.iterations <= 1);
  CHECK(m.alphas.size() == s.size());
}

TEST_CASE("random problems: box, dual feasibility and KKT on converged fits") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> shift(0.0, 3.0);
  int converged = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const double d = shift(rng);
    std::vector<Sample2D> s;
    for (int i = 0; i < 30; ++i) {
      const bool safe = i % 2 == 0;
      s.push_back({n(rng) + (safe ? d : -d), n(rng) * 2 + (safe ? 1 : -1), safe ? S : U});
    }
    const double c = trial % 2 ? 1.0 : 10.0;
    const auto m = fit_svm(s, {c, 1e-3, 20000});
    for (double a : m.alphas) {
      CHECK(a >= 0.0);
      CHECK(a <= c);
    }
    CHECK(std::fabs(dual_sum(m, s)) < 1e-8);
    if (m.converged) {
      ++converged;
      CHECK(kkt(m, s) <= m.tol + 1e-9);
      CHECK(max_kkt_violation(m, s) == doctest::Approx(kkt(m, s)).epsilon(1e-9));
    }
    const auto again = fit_svm(s, {c, 1e-3, 20000});
    CHECK(again.w == m.w);
    CHECK(again.b == m.b);
  }
  CHECK(converged > 30);
}
