#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fairtree/label_set.hpp"
#include "fairtree/schema.hpp"

namespace fairtree {

/// Tree node stored in a flat preorder arena.
///
/// Internal nodes test `x[feature] <= threshold`: when the test holds the
/// walk continues at `if_true`, otherwise at `if_false` (drawn as the right
/// and left child respectively). Leaves carry per-label training counts and
/// the label frequency distribution.
struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t feature = kLeaf;
    double threshold = 0.0;
    std::uint32_t if_false = 0;
    std::uint32_t if_true = 0;
    std::vector<double> counts;
    std::vector<double> distribution;

    bool is_leaf() const { return feature == kLeaf; }
    double sample_count() const;

    bool operator==(const TreeNode&) const = default;
};

/// Leaf payload: counts, with the distribution derived from them, or the
/// fallback distribution when the counts are all zero.
TreeNode make_leaf(std::vector<double> counts, std::span<const double> fallback = {});

/// Univariate hard-split classification tree.
class DecisionTree {
public:
    DecisionTree() = default;

    /// Takes ownership of a preorder node arena rooted at index 0 and
    /// validates it.
    DecisionTree(std::size_t num_features, std::size_t num_labels, std::vector<TreeNode> nodes);

    static DecisionTree single_leaf(std::size_t num_features, std::size_t num_labels, std::vector<double> counts);

    std::size_t num_features() const { return num_features_; }
    std::size_t num_labels() const { return num_labels_; }
    std::size_t node_count() const { return nodes_.size(); }
    const TreeNode& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    /// Index of the leaf reached by x. Throws DataError on a width mismatch.
    std::size_t leaf_index(std::span<const double> x) const;
    LabelSet predict(std::span<const double> x) const;

    /// argmax set of a leaf's distribution.
    LabelSet leaf_labels(std::size_t leaf) const;

    std::size_t leaf_count() const;
    /// Longest root-to-leaf path in edges; a single leaf has depth 0.
    std::size_t depth() const;
    /// Depth of every node.
    std::vector<std::size_t> node_depths() const;
    /// Leaf indexes in preorder.
    std::vector<std::size_t> leaves() const;
    /// Internal node indexes in preorder.
    std::vector<std::size_t> internal_nodes() const;
    /// Last node index (inclusive) of the subtree rooted at i.
    std::size_t subtree_end(std::size_t i) const;

    /// Copy of the subtree rooted at i.
    DecisionTree subtree(std::size_t i) const;
    /// Copy with the subtree at i replaced by `donor`.
    DecisionTree replace_subtree(std::size_t i, const DecisionTree& donor) const;
    /// Copy with node i turned into a leaf holding the summed counts of the
    /// leaves below it.
    DecisionTree collapse(std::size_t i) const;
    /// Copy where every node at depth max_depth becomes a leaf.
    DecisionTree truncate(std::size_t max_depth) const;

    bool operator==(const DecisionTree&) const = default;

private:
    void validate() const;
    void append_subtree(std::vector<TreeNode>& out, std::size_t i) const;
    std::vector<double> summed_counts(std::size_t i) const;

    std::size_t num_features_ = 0;
    std::size_t num_labels_ = 0;
    std::vector<TreeNode> nodes_;
};

/// Combines the label sets output by the trees of a forest.
///
/// A tree outputting m labels gives each of them 1/m of a vote; the result
/// is the set of labels with the maximal total. Tallies are kept as exact
/// integers scaled by vote_unit(num_labels).
std::int64_t vote_unit(std::size_t num_labels);
LabelSet majority_vote(std::span<const LabelSet> outputs, std::size_t num_labels);
/// argmax set of an integer tally.
LabelSet tally_winners(std::span<const std::int64_t> tally);

/// Majority-voting ensemble.
class Forest {
public:
    Forest() = default;
    explicit Forest(std::vector<DecisionTree> trees);
    static Forest from_tree(DecisionTree tree);

    std::size_t size() const { return trees_.size(); }
    const std::vector<DecisionTree>& trees() const { return trees_; }
    const DecisionTree& tree(std::size_t i) const { return trees_[i]; }
    std::size_t num_features() const { return trees_.front().num_features(); }
    std::size_t num_labels() const { return trees_.front().num_labels(); }

    LabelSet predict(std::span<const double> x) const;
    std::size_t leaf_count() const;

    bool operator==(const Forest&) const = default;

private:
    std::vector<DecisionTree> trees_;
};

using Model = std::variant<DecisionTree, Forest>;

inline std::size_t leaf_count(const DecisionTree& t) { return t.leaf_count(); }
inline std::size_t leaf_count(const Forest& f) { return f.leaf_count(); }
std::size_t leaf_count(const Model& m);
LabelSet predict(const Model& m, std::span<const double> x);
Forest as_forest(const Model& m);

} // namespace fairtree
