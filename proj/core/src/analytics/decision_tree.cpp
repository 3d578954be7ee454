#include "airq/analytics/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "airq/error.hpp"

namespace airq::analytics {
namespace {

using Index = std::vector<std::size_t>;

// Weighted child impurity is n - Q where Q = sum over children of
// (safe^2 + unsafe^2) / n_child, so minimising impurity maximises Q. Q is kept
// as an exact fraction to make tie-breaking independent of rounding.
struct Purity {
  __int128 num = 0;
  __int128 den = 1;

  static Purity of(const ClassCounts& l, const ClassCounts& r) {
    const auto sq = [](std::size_t v) { return static_cast<__int128>(v) * v; };
    const __int128 nl = l.total();
    const __int128 nr = r.total();
    return {(sq(l.safe) + sq(l.unsafe)) * nr + (sq(r.safe) + sq(r.unsafe)) * nl, nl * nr};
  }
  bool better_than(const Purity& o) const { return num * o.den > o.num * den; }
};

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  Purity purity;
};

ClassCounts count(std::span<const Sample2D> samples, const Index& idx) {
  ClassCounts c;
  for (auto i : idx) (*samples[i].label == Label::kSafe ? c.safe : c.unsafe)++;
  return c;
}

std::optional<Candidate> best_split(std::span<const Sample2D> samples, const Index& idx,
                                    std::size_t min_leaf) {
  std::optional<Candidate> best;
  const ClassCounts total = count(samples, idx);
  for (int feature = 0; feature < 2; ++feature) {
    Index order = idx;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return samples[a].feature(feature) < samples[b].feature(feature);
    });
    ClassCounts left;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      (*samples[order[k]].label == Label::kSafe ? left.safe : left.unsafe)++;
      const double lo = samples[order[k]].feature(feature);
      const double hi = samples[order[k + 1]].feature(feature);
      if (lo == hi) continue;
      const ClassCounts right{total.safe - left.safe, total.unsafe - left.unsafe};
      if (left.total() < min_leaf || right.total() < min_leaf) continue;
      Candidate c{feature, lo + (hi - lo) / 2.0, Purity::of(left, right)};
      // Features and thresholds are visited in ascending order, so a strict
      // improvement test keeps the lowest (feature, threshold) among ties.
      if (!best || c.purity.better_than(best->purity)) best = c;
    }
  }
  return best;
}

TreeNodePtr grow(std::span<const Sample2D> samples, const Index& idx, int depth,
                 const TreeParams& params) {
  auto node = std::make_shared<TreeNode>();
  node->counts = count(samples, idx);
  const bool pure = node->counts.safe == 0 || node->counts.unsafe == 0;
  if (!pure && depth < params.max_depth) {
    if (auto cand = best_split(samples, idx, params.min_leaf)) {
      Index left;
      Index right;
      for (auto i : idx)
        (samples[i].feature(cand->feature) <= cand->threshold ? left : right).push_back(i);
      node->kind = TreeSplit{cand->feature, cand->threshold, grow(samples, left, depth + 1, params),
                             grow(samples, right, depth + 1, params)};
      return node;
    }
  }
  node->kind = TreeLeaf{node->counts.majority(), node->counts.total()};
  return node;
}

}  // namespace

double ClassCounts::gini() const {
  const double n = static_cast<double>(total());
  if (n == 0) return 0.0;
  const double ps = static_cast<double>(safe) / n;
  const double pu = static_cast<double>(unsafe) / n;
  return 1.0 - ps * ps - pu * pu;
}

TreeNodePtr fit_decision_tree(std::span<const Sample2D> samples, TreeParams params) {
  if (samples.empty()) fail(ErrorCode::kInsufficientData, "decision tree needs at least 1 sample");
  if (params.max_depth < 1)
    fail(ErrorCode::kInvalidParameter, "max_depth must be >= 1", {"max_depth"});
  if (params.min_leaf < 1)
    fail(ErrorCode::kInvalidParameter, "min_leaf must be >= 1", {"min_leaf"});
  for (const auto& s : samples) {
    if (!s.label) fail(ErrorCode::kInvalidParameter, "decision tree samples must be labeled", {"label"});
    if (!std::isfinite(s.x) || !std::isfinite(s.y))
      fail(ErrorCode::kInvalidParameter, "sample coordinates must be finite");
  }
  Index all(samples.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return grow(samples, all, 0, params);
}

const TreeNode& route(const TreeNode& tree, const Sample2D& point) {
  const TreeNode* node = &tree;
  while (!node->is_leaf()) {
    const auto& s = node->split();
    node = point.feature(s.feature_index) <= s.threshold ? s.left.get() : s.right.get();
  }
  return *node;
}

Label predict(const TreeNode& tree, const Sample2D& point) { return route(tree, point).leaf().label; }

int tree_depth(const TreeNode& tree) {
  if (tree.is_leaf()) return 0;
  return 1 + std::max(tree_depth(*tree.split().left), tree_depth(*tree.split().right));
}

std::size_t leaf_count(const TreeNode& tree) {
  if (tree.is_leaf()) return 1;
  return leaf_count(*tree.split().left) + leaf_count(*tree.split().right);
}

}  // namespace airq::analytics
