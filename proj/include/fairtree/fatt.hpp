#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairtree/rng.hpp"
#include "fairtree/schema.hpp"
#include "fairtree/similarity.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

enum class MutationMode { GrowOnly, GrowAndPrune };

const char* mutation_keyword(MutationMode m);
/// Accepts "grow" and "grow-prune".
MutationMode parse_mutation(const std::string& s);

struct GaConfig {
    std::size_t population_size = 32;
    std::size_t iterations = 100;
    double alpha = 0.5; // accuracy weight
    double beta = 0.5;  // fairness weight
    MutationMode mutation = MutationMode::GrowAndPrune;
    double crossover_probability = 0.9;
    double mutation_probability = 0.3;
    std::size_t elitism = 2;
    std::size_t max_depth_cap = 8;
    /// Leaves are grown only when they route at least twice this many
    /// samples, and each side of a new split keeps at least this many.
    std::size_t min_leaf_size = 5;
    /// Fairness is measured on a fixed seeded subsample of this size; nullopt
    /// uses the whole training set.
    std::optional<std::size_t> fairness_sample_size;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Individual {
    DecisionTree tree;
    double fitness = 0.0;
    double accuracy = 0.0;
    double fairness = 0.0;
};

/// Data the fitness function is evaluated on.
struct FitnessContext {
    const LabeledDataset* train = nullptr;
    LabeledDataset fairness_set;
    Similarity similarity;
    double alpha = 0.5;
    double beta = 0.5;
};

/// fairness_set is the training set, or its fixed subsample when
/// cfg.fairness_sample_size is smaller than it.
FitnessContext make_fitness_context(const LabeledDataset& train, const Similarity& similarity, const GaConfig& cfg);

/// alpha * training accuracy + beta * fairness ratio (unbounded verifier).
Individual fitness(const DecisionTree& tree, const FitnessContext& ctx);
Individual fitness(const DecisionTree& tree, const LabeledDataset& train, const Similarity& similarity,
                   const GaConfig& cfg);

/// Fitness-proportional choice; uniform when every fitness is zero.
std::size_t select_roulette(std::span<const Individual> population, Rng& rng);
std::size_t select_roulette(std::span<const double> fitness, Rng& rng);

/// Replaces a uniformly chosen node of t1 by a uniformly chosen subtree of
/// t2, then cuts the result back to max_depth_cap.
DecisionTree crossover(const DecisionTree& t1, const DecisionTree& t2, std::size_t max_depth_cap, Rng& rng);

/// Splits a random growable leaf: one routing at least 2 * min_leaf_size
/// training samples and lying above the depth cap. The split feature is
/// random among those with a usable threshold, and the threshold is the
/// midpoint between a random routed value and the next distinct one, chosen
/// so that both sides keep at least min_leaf_size samples. Returns the tree
/// unchanged when no leaf is growable.
DecisionTree grow(const DecisionTree& tree, const LabeledDataset& train, std::size_t min_leaf_size,
                  std::size_t max_depth_cap, Rng& rng);
/// Collapses a random internal node. No-op on a single leaf.
DecisionTree prune(const DecisionTree& tree, Rng& rng);
/// GrowOnly: grow. GrowAndPrune: grow or prune with probability 1/2 each.
DecisionTree mutate(const DecisionTree& tree, MutationMode mode, const LabeledDataset& train,
                    std::size_t min_leaf_size, std::size_t max_depth_cap, Rng& rng);

/// Recomputes leaf counts and distributions from `train`. A leaf reached by
/// no sample gets zero counts and the distribution of its nearest ancestor
/// that is reached.
DecisionTree refit_leaves(const DecisionTree& tree, const LabeledDataset& train);

struct GenerationLog {
    std::size_t generation = 0;
    double best_fitness = 0.0; // best ever, up to this generation
    double mean_fitness = 0.0; // current population
    double best_accuracy = 0.0;
    double best_fairness = 0.0;
    std::size_t best_leaf_count = 0;
};

struct FattResult {
    Individual best;
    std::vector<GenerationLog> log; // generation 0 is the initial population
};

/// Genetic training of a single tree.
///
/// The initial population is half CARTs fitted on bootstrap resamples with
/// random depth in [1, max_depth_cap], half random trees grown from a leaf.
/// Each generation keeps the `elitism` fittest, fills the rest with
/// roulette-selected parents passed through crossover and mutation, and
/// refits every child's leaves. Fitness is evaluated on up to `jobs`
/// threads; the random stream is consumed only by the operators, so the
/// result is the same for every `jobs`.
FattResult train_fatt(const LabeledDataset& train, const Similarity& similarity, const GaConfig& cfg,
                      std::size_t jobs = 1);

std::string log_to_csv(const std::vector<GenerationLog>& log);

} // namespace fairtree
