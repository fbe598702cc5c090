#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairtree/schema.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

enum class Criterion { Gini, Entropy };

const char* criterion_keyword(Criterion c);
Criterion parse_criterion(const std::string& s);

/// Gini impurity 1 - sum p^2 of a count vector.
double gini(std::span<const double> counts);
/// Shannon entropy in bits, with 0 log 0 = 0.
double entropy(std::span<const double> counts);
double impurity(Criterion c, std::span<const double> counts);

struct CartParams {
    Criterion criterion = Criterion::Gini;
    std::size_t max_depth = 5;
    std::size_t min_samples_leaf = 1;

    void validate() const;
    bool operator==(const CartParams&) const = default;
};

struct RfParams {
    std::size_t n_trees = 10;
    CartParams cart;
    /// Features examined per node as a fraction of d; nullopt means ceil(sqrt(d)).
    std::optional<double> feature_fraction;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const RfParams&) const = default;
};

/// Greedy top-down CART.
///
/// Candidate thresholds are midpoints between consecutive distinct values
/// of a feature at a node. The split with the largest impurity decrease
/// wins; ties go to the lower feature index, then the lower threshold.
/// Growth stops at max_depth, on pure nodes, and when no split leaves
/// min_samples_leaf samples on both sides.
DecisionTree train_cart(const LabeledDataset& train, const CartParams& params);

/// Same as train_cart on a multiset of row indexes (duplicates allowed).
DecisionTree train_cart_on(const LabeledDataset& train, std::span<const std::size_t> rows, const CartParams& params);

/// Random forest: every tree sees a bootstrap resample (when enabled) and a
/// fresh random feature subset at every node. Tree i draws from stream i of
/// the seed, so the result does not depend on `jobs`.
Forest train_rf(const LabeledDataset& train, const RfParams& params, std::size_t jobs = 1);

struct CartGrid {
    std::vector<Criterion> criteria{Criterion::Gini, Criterion::Entropy};
    std::vector<std::size_t> depths;
    std::size_t min_samples_leaf = 1;
};

struct RfGrid {
    std::vector<Criterion> criteria{Criterion::Gini, Criterion::Entropy};
    std::vector<std::size_t> depths;
    std::vector<std::size_t> n_trees;
    bool bootstrap = true;
};

/// Depths 5, 15, ..., 95 and, for forests, 5, 15, ..., 95 trees.
CartGrid default_cart_grid();
RfGrid default_rf_grid();

template <typename Params>
struct TuneEntry {
    Params params;
    double validation_accuracy = 0.0;
    std::size_t leaf_count = 0;
};

template <typename Params>
struct TuneResult {
    Params best;
    double best_accuracy = 0.0;
    std::vector<TuneEntry<Params>> entries; // grid order
};

/// Holds out 20% of `train` (seeded), fits every grid point on the rest and
/// keeps the one with the best validation accuracy; ties go to the smaller
/// model, then to the earlier grid point.
TuneResult<CartParams> tune_cart(const LabeledDataset& train, const CartGrid& grid, std::uint64_t seed);
TuneResult<RfParams> tune_rf(const LabeledDataset& train, const RfGrid& grid, std::uint64_t seed, std::size_t jobs = 1);

/// CART whose max depth and min leaf size are read off a trained tree.
/// Throws ConfigError when no leaf of the hint carries samples.
DecisionTree train_hinted_cart(const LabeledDataset& train, const DecisionTree& hint, Criterion criterion);

} // namespace fairtree
