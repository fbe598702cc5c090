#include "fairtree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairtree/error.hpp"

namespace fairtree {

double TreeNode::sample_count() const
{
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

TreeNode make_leaf(std::vector<double> counts, std::span<const double> fallback)
{
    TreeNode leaf;
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    leaf.distribution.resize(counts.size());
    if (total > 0.0) {
        for (std::size_t l = 0; l < counts.size(); ++l)
            leaf.distribution[l] = counts[l] / total;
    } else if (fallback.size() == counts.size()) {
        std::copy(fallback.begin(), fallback.end(), leaf.distribution.begin());
    } else {
        std::fill(leaf.distribution.begin(), leaf.distribution.end(), 1.0 / static_cast<double>(counts.size()));
    }
    leaf.counts = std::move(counts);
    return leaf;
}

DecisionTree::DecisionTree(std::size_t num_features, std::size_t num_labels, std::vector<TreeNode> nodes)
    : num_features_(num_features), num_labels_(num_labels), nodes_(std::move(nodes))
{
    validate();
}

DecisionTree DecisionTree::single_leaf(std::size_t num_features, std::size_t num_labels, std::vector<double> counts)
{
    if (counts.empty())
        counts.assign(num_labels, 0.0);
    return DecisionTree(num_features, num_labels, {make_leaf(std::move(counts))});
}

void DecisionTree::validate() const
{
    if (num_labels_ == 0)
        throw ModelError("tree: no labels");
    if (nodes_.empty())
        throw ModelError("tree: no nodes");
    // Canonical preorder: false child right after its parent, true child after
    // the false subtree, and the root subtree spans the whole arena.
    std::vector<std::size_t> stack{0};
    std::size_t expected = 0;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        if (i != expected)
            throw ModelError("tree: node arena is not in canonical preorder");
        ++expected;
        const auto& n = nodes_[i];
        if (n.is_leaf()) {
            if (n.counts.size() != num_labels_ || n.distribution.size() != num_labels_)
                throw ModelError("tree: leaf has the wrong number of labels");
            for (std::size_t l = 0; l < num_labels_; ++l)
                if (!(n.counts[l] >= 0.0) || !(n.distribution[l] >= 0.0) || !(n.distribution[l] <= 1.0))
                    throw ModelError("tree: leaf counts or frequencies out of range");
            continue;
        }
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= num_features_)
            throw ModelError("tree: split feature out of range");
        if (!std::isfinite(n.threshold))
            throw ModelError("tree: split threshold is not finite");
        if (n.if_false != i + 1 || n.if_false >= nodes_.size() || n.if_true >= nodes_.size())
            throw ModelError("tree: malformed child indexes");
        stack.push_back(n.if_true);
        stack.push_back(n.if_false);
    }
    if (expected != nodes_.size())
        throw ModelError("tree: unreachable nodes in arena");
    // The true child must directly follow the false subtree.
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (!nodes_[i].is_leaf() && nodes_[i].if_true != subtree_end(nodes_[i].if_false) + 1)
            throw ModelError("tree: node arena is not in canonical preorder");
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const
{
    if (x.size() != num_features_)
        throw DataError("predict: sample has " + std::to_string(x.size()) + " columns, tree expects " +
                        std::to_string(num_features_));
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.if_true : n.if_false;
    }
    return i;
}

LabelSet DecisionTree::predict(std::span<const double> x) const
{
    return leaf_labels(leaf_index(x));
}

LabelSet DecisionTree::leaf_labels(std::size_t leaf) const
{
    const auto& dist = nodes_[leaf].distribution;
    const double best = *std::max_element(dist.begin(), dist.end());
    LabelSet out;
    for (std::size_t l = 0; l < dist.size(); ++l)
        if (dist[l] == best)
            out.insert(static_cast<int>(l));
    return out;
}

std::size_t DecisionTree::leaf_count() const
{
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<std::size_t> DecisionTree::node_depths() const
{
    std::vector<std::size_t> depth(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (!nodes_[i].is_leaf()) {
            depth[nodes_[i].if_false] = depth[i] + 1;
            depth[nodes_[i].if_true] = depth[i] + 1;
        }
    return depth;
}

std::size_t DecisionTree::depth() const
{
    const auto d = node_depths();
    return *std::max_element(d.begin(), d.end());
}

std::vector<std::size_t> DecisionTree::leaves() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].is_leaf())
            out.push_back(i);
    return out;
}

std::vector<std::size_t> DecisionTree::internal_nodes() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (!nodes_[i].is_leaf())
            out.push_back(i);
    return out;
}

std::size_t DecisionTree::subtree_end(std::size_t i) const
{
    while (!nodes_[i].is_leaf())
        i = nodes_[i].if_true;
    return i;
}

void DecisionTree::append_subtree(std::vector<TreeNode>& out, std::size_t i) const
{
    const std::size_t first = i;
    const std::size_t last = subtree_end(i);
    const auto offset = static_cast<std::int64_t>(out.size()) - static_cast<std::int64_t>(first);
    for (std::size_t k = first; k <= last; ++k) {
        TreeNode n = nodes_[k];
        if (!n.is_leaf()) {
            n.if_false = static_cast<std::uint32_t>(n.if_false + offset);
            n.if_true = static_cast<std::uint32_t>(n.if_true + offset);
        }
        out.push_back(std::move(n));
    }
}

DecisionTree DecisionTree::subtree(std::size_t i) const
{
    std::vector<TreeNode> out;
    append_subtree(out, i);
    return DecisionTree(num_features_, num_labels_, std::move(out));
}

DecisionTree DecisionTree::replace_subtree(std::size_t i, const DecisionTree& donor) const
{
    if (donor.num_labels_ != num_labels_ || donor.num_features_ != num_features_)
        throw ModelError("replace_subtree: incompatible donor tree");
    const std::size_t last = subtree_end(i);
    const auto removed = static_cast<std::int64_t>(last - i + 1);
    const auto added = static_cast<std::int64_t>(donor.nodes_.size());
    const auto shift = added - removed;

    std::vector<TreeNode> out;
    out.reserve(nodes_.size() + donor.nodes_.size());
    auto remap = [&](std::uint32_t child) {
        return child > last ? static_cast<std::uint32_t>(child + shift) : child;
    };
    for (std::size_t k = 0; k < i; ++k) {
        TreeNode n = nodes_[k];
        if (!n.is_leaf()) {
            n.if_false = remap(n.if_false);
            n.if_true = remap(n.if_true);
        }
        out.push_back(std::move(n));
    }
    donor.append_subtree(out, 0);
    for (std::size_t k = last + 1; k < nodes_.size(); ++k) {
        TreeNode n = nodes_[k];
        if (!n.is_leaf()) {
            n.if_false = remap(n.if_false);
            n.if_true = remap(n.if_true);
        }
        out.push_back(std::move(n));
    }
    return DecisionTree(num_features_, num_labels_, std::move(out));
}

std::vector<double> DecisionTree::summed_counts(std::size_t i) const
{
    std::vector<double> counts(num_labels_, 0.0);
    for (std::size_t k = i; k <= subtree_end(i); ++k)
        if (nodes_[k].is_leaf())
            for (std::size_t l = 0; l < num_labels_; ++l)
                counts[l] += nodes_[k].counts[l];
    return counts;
}

DecisionTree DecisionTree::collapse(std::size_t i) const
{
    if (nodes_[i].is_leaf())
        return *this;
    // An all-empty subtree keeps the distribution of its first leaf.
    std::size_t first_leaf = i;
    while (!nodes_[first_leaf].is_leaf())
        first_leaf = nodes_[first_leaf].if_false;
    const auto& fallback = nodes_[first_leaf].distribution;
    return replace_subtree(i, DecisionTree(num_features_, num_labels_, {make_leaf(summed_counts(i), fallback)}));
}

DecisionTree DecisionTree::truncate(std::size_t max_depth) const
{
    DecisionTree out = *this;
    for (;;) {
        const auto depths = out.node_depths();
        std::size_t target = out.nodes_.size();
        for (std::size_t k = 0; k < out.nodes_.size(); ++k)
            if (!out.nodes_[k].is_leaf() && depths[k] >= max_depth) {
                target = k;
                break;
            }
        if (target == out.nodes_.size())
            return out;
        out = out.collapse(target);
    }
}

std::int64_t vote_unit(std::size_t num_labels)
{
    if (num_labels > 40)
        throw ModelError("voting supports at most 40 labels");
    std::int64_t unit = 1;
    for (std::int64_t m = 2; m <= static_cast<std::int64_t>(num_labels); ++m)
        unit = std::lcm(unit, m);
    return unit;
}

LabelSet tally_winners(std::span<const std::int64_t> tally)
{
    const auto best = *std::max_element(tally.begin(), tally.end());
    LabelSet out;
    for (std::size_t l = 0; l < tally.size(); ++l)
        if (tally[l] == best)
            out.insert(static_cast<int>(l));
    return out;
}

LabelSet majority_vote(std::span<const LabelSet> outputs, std::size_t num_labels)
{
    const auto unit = vote_unit(num_labels);
    std::vector<std::int64_t> tally(num_labels, 0);
    for (const auto& out : outputs) {
        const auto share = unit / static_cast<std::int64_t>(out.size());
        for (int l : out)
            tally[static_cast<std::size_t>(l)] += share;
    }
    return tally_winners(tally);
}

Forest::Forest(std::vector<DecisionTree> trees) : trees_(std::move(trees))
{
    if (trees_.empty())
        throw ModelError("forest: no trees");
    for (const auto& t : trees_)
        if (t.num_features() != trees_.front().num_features() || t.num_labels() != trees_.front().num_labels())
            throw ModelError("forest: trees disagree on features or labels");
}

Forest Forest::from_tree(DecisionTree tree)
{
    std::vector<DecisionTree> trees;
    trees.push_back(std::move(tree));
    return Forest(std::move(trees));
}

LabelSet Forest::predict(std::span<const double> x) const
{
    if (trees_.size() == 1)
        return trees_.front().predict(x);
    std::vector<LabelSet> outputs;
    outputs.reserve(trees_.size());
    for (const auto& t : trees_)
        outputs.push_back(t.predict(x));
    return majority_vote(outputs, num_labels());
}

std::size_t Forest::leaf_count() const
{
    std::size_t n = 0;
    for (const auto& t : trees_)
        n += t.leaf_count();
    return n;
}

std::size_t leaf_count(const Model& m)
{
    return std::visit([](const auto& c) { return c.leaf_count(); }, m);
}

LabelSet predict(const Model& m, std::span<const double> x)
{
    return std::visit([&](const auto& c) { return c.predict(x); }, m);
}

Forest as_forest(const Model& m)
{
    if (const auto* t = std::get_if<DecisionTree>(&m))
        return Forest::from_tree(*t);
    return std::get<Forest>(m);
}

} // namespace fairtree
