#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fairtree/abstract_domain.hpp"
#include "fairtree/label_set.hpp"
#include "fairtree/schema.hpp"
#include "fairtree/similarity.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

/// Minimal conjunction of split conditions reaching one leaf: at most one
/// `<=` and one `>` per column, sorted by column.
struct LeafConstraintSet {
    std::size_t leaf = 0;
    std::vector<Constraint> constraints;
};

std::vector<LeafConstraintSet> leaf_constraints(const DecisionTree& tree);

struct ReachableLeaf {
    std::size_t leaf = 0;
    ReducedAbstractValue value; // input value refined by the leaf's path
};

struct TreeAnalysis {
    LabelSet labels; // union of argmax sets over reachable leaves
    std::vector<ReachableLeaf> leaves;
};

/// Leaves reachable from some sample of v, found by pushing v down the
/// tree. Precondition: v is not bottom.
TreeAnalysis analyze_tree(const DecisionTree& tree, const ReducedAbstractValue& v);

/// Same label set computed leaf by leaf with satisfies(v, C_leaf).
LabelSet analyze_tree_by_constraints(const DecisionTree& tree, const ReducedAbstractValue& v);

struct AnalysisConfig {
    /// Wall-clock budget per query; nullopt means unbounded.
    std::optional<std::chrono::microseconds> timeout;
    /// Expansions between two clock reads.
    std::size_t clock_stride = 64;

    /// Throws ConfigError when the timeout is not positive.
    void validate() const;
};

enum class Status { Stable, Unstable, Unknown };

const char* status_keyword(Status s);

struct Counterexample {
    std::optional<Sample> reference; // the query sample, when known
    LabelSet reference_labels;
    Sample witness;                  // region sample labelled differently
    LabelSet witness_labels;
    std::size_t region = 0;
};

struct Verdict {
    Status status = Status::Unknown;
    /// Stable: the common output. Unstable: outputs seen so far (including
    /// the counterexample's). Unknown: a superset of every output label.
    LabelSet labels;
    std::optional<Counterexample> counterexample;
    std::chrono::nanoseconds elapsed{0};
    std::size_t states = 0;
};

/// Decides whether every sample in the union of `regions` gets exactly the
/// `expected` output from the forest.
///
/// The forest is explored as if its trees were stacked into one tree, one
/// tree per level, without building it: a search state is a prefix of
/// per-tree leaf choices, the input value refined by their paths, and the
/// partial vote tally. States that can no longer produce an output other
/// than `expected` are dropped; the rest are expanded best first, most
/// promising disagreement first. The first completed state whose vote
/// differs from `expected` yields a concrete counterexample.
Verdict analyze_forest(const Forest& forest, std::span<const ReducedAbstractValue> regions, const LabelSet& expected,
                       const AnalysisConfig& cfg, const Sample* reference = nullptr);

Verdict is_stable(const Forest& forest, std::span<const double> x, std::span<const ReducedAbstractValue> regions,
                  const AnalysisConfig& cfg);
Verdict is_stable(const Model& model, std::span<const double> x, std::span<const ReducedAbstractValue> regions,
                  const AnalysisConfig& cfg);

/// Stability on the similarity-induced perturbation of x.
Verdict is_fair(const Forest& forest, std::span<const double> x, const Similarity& similarity,
                const std::shared_ptr<const ColumnLayout>& layout, const AnalysisConfig& cfg);
Verdict is_fair(const Model& model, std::span<const double> x, const Similarity& similarity,
                const std::shared_ptr<const ColumnLayout>& layout, const AnalysisConfig& cfg);

/// Stable and correctly classified as {y}.
bool is_robust(const Forest& forest, std::span<const double> x, int y, std::span<const ReducedAbstractValue> regions,
               const AnalysisConfig& cfg);

struct FairnessResult {
    double ratio = 0.0; // stable / total; Unknown counts as not fair
    std::size_t stable = 0;
    std::size_t unstable = 0;
    std::size_t unknown = 0;
    std::vector<Verdict> verdicts; // one per sample, in dataset order
    double mean_time_ms = 0.0;
};

/// Share of samples on which the model is fair. Per-sample queries run on
/// up to `jobs` threads; the result does not depend on `jobs`.
FairnessResult fairness_metric(const Forest& forest, const LabeledDataset& data, const Similarity& similarity,
                               const AnalysisConfig& cfg, std::size_t jobs = 1);
FairnessResult fairness_metric(const Model& model, const LabeledDataset& data, const Similarity& similarity,
                               const AnalysisConfig& cfg, std::size_t jobs = 1);

} // namespace fairtree
