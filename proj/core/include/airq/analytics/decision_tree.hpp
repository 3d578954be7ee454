#pragma once

#include <memory>
#include <span>
#include <variant>

#include "airq/analytics/sample.hpp"

namespace airq::analytics {

struct TreeNode;
using TreeNodePtr = std::shared_ptr<const TreeNode>;

struct ClassCounts {
  std::size_t safe = 0;
  std::size_t unsafe = 0;

  std::size_t total() const { return safe + unsafe; }
  double gini() const;
  // Ties go to UNSAFE.
  Label majority() const { return safe > unsafe ? Label::kSafe : Label::kUnsafe; }
};

struct TreeLeaf {
  Label label = Label::kUnsafe;
  std::size_t sample_count = 0;
};

// Samples with feature <= threshold go left.
struct TreeSplit {
  int feature_index = 0;  // 0 = temperature, 1 = humidity
  double threshold = 0.0;
  TreeNodePtr left;
  TreeNodePtr right;
};

struct TreeNode {
  std::variant<TreeLeaf, TreeSplit> kind;
  ClassCounts counts;  // training samples that reached this node

  bool is_leaf() const { return std::holds_alternative<TreeLeaf>(kind); }
  const TreeLeaf& leaf() const { return std::get<TreeLeaf>(kind); }
  const TreeSplit& split() const { return std::get<TreeSplit>(kind); }
};

struct TreeParams {
  int max_depth = 4;
  std::size_t min_leaf = 1;
};

// Greedy CART over axis-aligned midpoint thresholds minimising weighted Gini.
// Equal-impurity candidates resolve to the lower feature index, then the lower
// threshold. Throws kInsufficientData on empty input, kInvalidParameter on
// unlabeled samples or non-positive parameters.
TreeNodePtr fit_decision_tree(std::span<const Sample2D> samples, TreeParams params = {});

Label predict(const TreeNode& tree, const Sample2D& point);

// Leaf reached by the point (for inspection and tests).
const TreeNode& route(const TreeNode& tree, const Sample2D& point);

int tree_depth(const TreeNode& tree);
std::size_t leaf_count(const TreeNode& tree);

}  // namespace airq::analytics
