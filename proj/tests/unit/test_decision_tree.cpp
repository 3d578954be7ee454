#include <doctest.h>

#include <random>

#include "airq/analytics/decision_tree.hpp"
#include "airq/analytics/model_io.hpp"
#include "airq/error.hpp"

using namespace airq;
using namespace airq::analytics;
using airq::salubrity::Label;

namespace {

constexpr auto S = Label::kSafe;
constexpr auto U = Label::kUnsafe;

double gini(std::size_t a, std::size_t b) {
  const double n = static_cast<double>(a + b);
  if (n == 0) return 0;
  const double p = a / n, q = b / n;
  return 1 - p * p - q * q;
}

// Best single split by scanning every midpoint, preferring lower feature then lower threshold.
struct Candidate {
  int feature = -1;
  double threshold = 0;
  double impurity = 1e9;
};

Candidate best_split(const std::vector<Sample2D>& s) {
  Candidate best;
  for (int f = 0; f < 2; ++f) {
    std::vector<double> v;
    for (const auto& p : s) v.push_back(p.feature(f));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double thr = (v[i] + v[i + 1]) / 2;
      std::size_t ls = 0, lu = 0, rs = 0, ru = 0;
      for (const auto& p : s) {
        const bool left = p.feature(f) <= thr;
        const bool safe = *p.label == S;
        (left ? (safe ? ls : lu) : (safe ? rs : ru))++;
      }
      const double n = static_cast<double>(s.size());
      const double imp = (ls + lu) / n * gini(ls, lu) + (rs + ru) / n * gini(rs, ru);
      if (imp < best.impurity - 1e-12) best = {f, thr, imp};
    }
  }
  return best;
}

void check_impurity_path(const TreeNode& node) {
  if (node.is_leaf()) {
    CHECK(node.leaf().sample_count >= 1);
    CHECK(node.leaf().sample_count == node.counts.total());
    return;
  }
  const auto& sp = node.split();
  REQUIRE(sp.left);
  REQUIRE(sp.right);
  const double n = static_cast<double>(node.counts.total());
  const double weighted = sp.left->counts.total() / n * sp.left->counts.gini() +
                          sp.right->counts.total() / n * sp.right->counts.gini();
  CHECK(weighted <= node.counts.gini() + 1e-12);
  CHECK(sp.left->counts.total() + sp.right->counts.total() == node.counts.total());
  check_impurity_path(*sp.left);
  check_impurity_path(*sp.right);
}

}  // namespace

TEST_CASE("pure input gives a single leaf") {
  const std::vector<Sample2D> s{{1, 1, S}, {2, 5, S}, {3, 2, S}};
  const auto t = fit_decision_tree(s);
  REQUIRE(t->is_leaf());
  CHECK(t->leaf().label == S);
  CHECK(t->leaf().sample_count == 3);
  CHECK(predict(*t, {100, -4, std::nullopt}) == S);
}

TEST_CASE("one dimensional layout splits at 1.5") {
  const std::vector<Sample2D> s{{0, 0, U}, {1, 0, U}, {2, 0, S}, {3, 0, S}};
  const auto t = fit_decision_tree(s);
  REQUIRE_FALSE(t->is_leaf());
  CHECK(t->split().feature_index == 0);
  CHECK(t->split().threshold == 1.5);
  REQUIRE(t->split().left->is_leaf());
  REQUIRE(t->split().right->is_leaf());
  CHECK(t->split().left->leaf().label == U);
  CHECK(t->split().right->leaf().label == S);
  const auto o = best_split(s);
  CHECK(o.feature == 0);
  CHECK(o.threshold == 1.5);
}

TEST_CASE("xor at depth 2 is fitted exactly") {
  const std::vector<Sample2D> s{{0, 0, U}, {1, 1, U}, {0, 1, S}, {1, 0, S}};
  const auto t = fit_decision_tree(s, {2, 1});
  CHECK(tree_depth(*t) == 2);
  CHECK(leaf_count(*t) == 4);
  for (const auto& p : s) CHECK(predict(*t, p) == *p.label);
  CHECK(training_accuracy(t, s) == 1.0);
}

TEST_CASE("xor at depth 1 cannot be fitted") {
  const std::vector<Sample2D> s{{0, 0, U}, {1, 1, U}, {0, 1, S}, {1, 0, S}};
  const auto t = fit_decision_tree(s, {1, 1});
  CHECK(tree_depth(*t) <= 1);
  CHECK(training_accuracy(t, s) < 1.0);
}

TEST_CASE("leaf ties go to UNSAFE") {
  const std::vector<Sample2D> s{{1, 1, S}, {1, 1, U}};
  const auto t = fit_decision_tree(s);
  REQUIRE(t->is_leaf());
  CHECK(t->leaf().label == U);
}

TEST_CASE("errors and parameter checks") {
  CHECK_THROWS_AS(fit_decision_tree({}), Error);
  try {
    fit_decision_tree({});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientData);
  }
  const std::vector<Sample2D> unlabeled{{1, 1, std::nullopt}};
  CHECK_THROWS_AS(fit_decision_tree(unlabeled), Error);
  const std::vector<Sample2D> s{{1, 1, S}, {2, 2, U}};
  CHECK_THROWS_AS(fit_decision_tree(s, {0, 1}), Error);
  CHECK_THROWS_AS(fit_decision_tree(s, {2, 0}), Error);
}

TEST_CASE("root split agrees with exhaustive search on random data") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coord(0, 9);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Sample2D> s;
    const int n = 3 + trial % 20;
    for (int i = 0; i < n; ++i) s.push_back({double(coord(rng)), double(coord(rng)), coin(rng) ? S : U});
    const auto t = fit_decision_tree(s, {1, 1});
    const auto o = best_split(s);
    const bool pure = std::all_of(s.begin(), s.end(), [&](const auto& p) { return p.label == s[0].label; });
    if (pure) {
      CHECK(t->is_leaf());
      continue;
    }
    if (o.feature < 0) {
      CHECK(t->is_leaf());
      continue;
    }
    REQUIRE_FALSE(t->is_leaf());
    CHECK(t->split().feature_index == o.feature);
    CHECK(t->split().threshold == o.threshold);
  }
}

TEST_CASE("structural invariants on random data") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(10, 35), h(20, 90);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Sample2D> s;
    for (int i = 0; i < 40; ++i) s.push_back({t(rng), h(rng), coin(rng) ? S : U});
    const TreeParams p{1 + trial % 5, std::size_t(1 + trial % 3)};
    const auto tree = fit_decision_tree(s, p);
    CHECK(tree_depth(*tree) <= p.max_depth);
    check_impurity_path(*tree);
    for (const auto& x : s) {
      const auto& leaf = route(*tree, x);
      REQUIRE(leaf.is_leaf());
      CHECK(leaf.leaf().sample_count >= p.min_leaf);
      // the sample contributed to this leaf's counts
      CHECK((*x.label == S ? leaf.counts.safe : leaf.counts.unsafe) >= 1);
      CHECK(predict(*tree, x) == leaf.leaf().label);
      CHECK(predict(*tree, x) == predict(*tree, x));
    }
  }
}

TEST_CASE("tree json round trip preserves predictions") {
  const std::vector<Sample2D> s{{0, 0, U}, {1, 1, U}, {0, 1, S}, {1, 0, S}, {0.5, 0.2, S}};
  const auto t = fit_decision_tree(s, {3, 1});
  const auto back = tree_from_json(tree_to_json(*t));
  CHECK(tree_to_json(*back) == tree_to_json(*t));
  for (double x = -1; x <= 2; x += 0.25)
    for (double y = -1; y <= 2; y += 0.25) CHECK(predict(*back, {x, y, std::nullopt}) == predict(*t, {x, y, std::nullopt}));
}
