#pragma once

// Ten-sample fixtures with hand-computed metric values.

#include "fairtree/schema.hpp"
#include "fairtree/similarity.hpp"
#include "fairtree/tree.hpp"

namespace fixtures {

using namespace fairtree;

/// x = 0..9, labels 0 0 1 1 1 1 1 1 0 1 ("no" = 0, "yes" = 1 positive).
inline LabeledDataset ten_samples()
{
    LabeledDataset d;
    d.schema.numeric_features = {{"x", 0}};
    d.schema.label_column = "y";
    d.schema.label_values = {"no", "yes"};
    d.schema.positive_label = 1;
    const int labels[] = {0, 0, 1, 1, 1, 1, 1, 1, 0, 1};
    for (int i = 0; i < 10; ++i) {
        d.samples.push_back({static_cast<double>(i)});
        d.labels.push_back(labels[i]);
    }
    return d;
}

/// x <= 4.5 -> no, otherwise yes.
inline DecisionTree cut_tree()
{
    TreeNode root;
    root.feature = 0;
    root.threshold = 4.5;
    root.if_false = 1;
    root.if_true = 2;
    return DecisionTree(1, 2, {root, make_leaf({0, 1}), make_leaf({1, 0})});
}

inline Similarity noise(double tau)
{
    Similarity s;
    s.kind = SimilaritySpec::Kind::Noise;
    s.noise.features = {0};
    s.noise.tau = tau;
    return s;
}

// Correct: samples 0, 1 (no) and 5, 6, 7, 9 (yes).
inline constexpr double kAccuracy = 0.6;
// TP 4 FN 3 TN 2 FP 1: 0.5 (4/7 + 2/3) = 13/21.
inline constexpr double kBalancedAccuracy = 0.6190476190476191;
// Label counts (3 no, 7 yes).
inline constexpr double kGini = 0.42000000000000004;
inline constexpr double kEntropy = 0.8812908992306927;
// At tau 1.5 samples 4, 5 and 6 reach the other side of 4.5 (6 - 1.5 lands
// on the cut, 3 + 1.5 does not pass it).
inline constexpr double kFairness = 0.7;

} // namespace fixtures
