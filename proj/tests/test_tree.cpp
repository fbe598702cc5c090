#include <doctest.h>

#include <algorithm>

#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"
#include "fairtree/tree.hpp"
#include "oracle.hpp"

using namespace fairtree;

namespace {

TreeNode split_node(int feature, double threshold, std::uint32_t if_true)
{
    TreeNode n;
    n.feature = feature;
    n.threshold = threshold;
    n.if_false = 0; // fixed up by the caller's index
    n.if_true = if_true;
    return n;
}

TreeNode leaf(std::vector<double> counts) { return make_leaf(std::move(counts)); }

// t1: white <= 0.5 ? {l2} : {l1};  t2: black <= 0.5 ? {l1} : {l2}
Forest color_forest()
{
    auto s1 = split_node(0, 0.5, 2);
    s1.if_false = 1;
    auto s2 = split_node(1, 0.5, 2);
    s2.if_false = 1;
    DecisionTree t1(2, 2, {s1, leaf({1, 0}), leaf({0, 1})});
    DecisionTree t2(2, 2, {s2, leaf({0, 1}), leaf({1, 0})});
    return Forest({t1, t2});
}

DecisionTree full_tree(std::size_t depth, std::size_t& next_leaf)
{
    std::vector<TreeNode> nodes;
    std::function<void(std::size_t)> rec = [&](std::size_t d) {
        if (d == depth) {
            std::vector<double> c(2, 0.0);
            c[next_leaf++ % 2] = 1.0;
            nodes.push_back(make_leaf(c));
            return;
        }
        const std::size_t me = nodes.size();
        TreeNode n;
        n.feature = static_cast<int>(d);
        n.threshold = 0.0;
        n.if_false = static_cast<std::uint32_t>(me + 1);
        nodes.push_back(n);
        rec(d + 1);
        nodes[me].if_true = static_cast<std::uint32_t>(nodes.size());
        rec(d + 1);
    };
    rec(0);
    return DecisionTree(depth, 2, nodes);
}

} // namespace

TEST_CASE("worked example: tree and forest outputs")
{
    const auto f = color_forest();
    CHECK(f.tree(0).predict(Sample{1, 0}) == LabelSet{0});
    CHECK(f.tree(1).predict(Sample{1, 0}) == LabelSet{0});
    CHECK(f.predict(Sample{1, 0}) == LabelSet{0});
    CHECK(f.tree(0).predict(Sample{0, 0}) == LabelSet{1});
    CHECK(f.tree(1).predict(Sample{0, 0}) == LabelSet{0});
    CHECK(f.predict(Sample{0, 0}) == (LabelSet{0, 1}));
    CHECK(f.leaf_count() == 4);
}

TEST_CASE("argmax ties give multi-label outputs")
{
    const auto t = DecisionTree::single_leaf(1, 2, {3, 3});
    CHECK(t.predict(Sample{0.0}) == (LabelSet{0, 1}));
    CHECK(t.leaf_count() == 1);
    CHECK(t.depth() == 0);
}

TEST_CASE("dimension mismatch is an error")
{
    CHECK_THROWS_AS(color_forest().predict(Sample{1.0}), DataError);
}

TEST_CASE("leaf counts of full trees")
{
    std::size_t next = 0;
    CHECK(full_tree(3, next).leaf_count() == 8);
    CHECK(full_tree(3, next).depth() == 3);
}

TEST_CASE("malformed arenas are rejected")
{
    auto s = split_node(0, 0.5, 1);
    s.if_false = 1;
    CHECK_THROWS_AS(DecisionTree(1, 2, {s, leaf({1, 0})}), ModelError);
    auto bad_feature = split_node(3, 0.5, 2);
    bad_feature.if_false = 1;
    CHECK_THROWS_AS(DecisionTree(1, 2, {bad_feature, leaf({1, 0}), leaf({0, 1})}), ModelError);
    CHECK_THROWS_AS(DecisionTree(1, 2, {leaf({1, 0, 0})}), ModelError);
}

TEST_CASE("property: predictions match a path-following oracle")
{
    Rng rng(5);
    for (int round = 0; round < 100; ++round) {
        const auto schema = oracle::random_schema(rng, 3);
        const auto t = oracle::random_tree(rng, schema, 3, 3);
        for (int i = 0; i < 20; ++i) {
            const auto x = oracle::random_sample(rng, schema);
            CHECK(t.predict(x) == LabelSet(oracle::tree_output(t, x)));
        }
    }
}

TEST_CASE("property: voting with identical trees equals the tree, and is order independent")
{
    Rng rng(9);
    for (int round = 0; round < 100; ++round) {
        const auto schema = oracle::random_schema(rng, 3);
        const auto t = oracle::random_tree(rng, schema, 3, 3);
        const Forest same({t, t, t});
        std::vector<DecisionTree> trees;
        for (int k = 0; k < 4; ++k)
            trees.push_back(oracle::random_tree(rng, schema, 3, 2));
        const Forest f(trees);
        std::reverse(trees.begin(), trees.end());
        std::swap(trees[0], trees[2]);
        const Forest g(trees);
        for (int i = 0; i < 10; ++i) {
            const auto x = oracle::random_sample(rng, schema);
            CHECK(same.predict(x) == t.predict(x));
            CHECK(f.predict(x) == g.predict(x));
            CHECK(f.predict(x) == oracle::forest_output(f, x));
        }
    }
}

TEST_CASE("fractional votes")
{
    CHECK(vote_unit(3) == 6);
    const std::vector<LabelSet> outs{LabelSet{0, 1}, LabelSet{1}};
    CHECK(majority_vote(outs, 2) == LabelSet{1});
    const std::vector<LabelSet> tie{LabelSet{0, 1, 2}, LabelSet{0, 1, 2}};
    CHECK(majority_vote(tie, 3) == (LabelSet{0, 1, 2}));
}

TEST_CASE("structural edits")
{
    std::size_t next = 0;
    const auto t = full_tree(2, next);
    CHECK(t.node_count() == 7);
    CHECK(t.subtree_end(1) == 3);
    CHECK(t.subtree(1).leaf_count() == 2);

    const auto donor = DecisionTree::single_leaf(2, 2, {2, 5});
    const auto r = t.replace_subtree(1, donor);
    CHECK(r.leaf_count() == 3);
    CHECK(r.node(1) == donor.node(0));
    CHECK(t.replace_subtree(0, donor) == donor);

    const auto c = t.collapse(0);
    CHECK(c.leaf_count() == 1);
    CHECK(c.node(0).counts == std::vector<double>{2, 2});

    CHECK(t.truncate(1).depth() == 1);
    CHECK(t.truncate(1).leaf_count() == 2);
    CHECK(t.truncate(5) == t);
}
