#include "fairtree/fatt.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fairtree/cart.hpp"
#include "fairtree/error.hpp"
#include "fairtree/metrics.hpp"
#include "fairtree/parallel.hpp"
#include "fairtree/verifier.hpp"

namespace fairtree {

const char* mutation_keyword(MutationMode m)
{
    return m == MutationMode::GrowOnly ? "grow" : "grow-prune";
}

MutationMode parse_mutation(const std::string& s)
{
    if (s == "grow")
        return MutationMode::GrowOnly;
    if (s == "grow-prune")
        return MutationMode::GrowAndPrune;
    throw ConfigError("unknown mutation mode '" + s + "' (expected grow or grow-prune)");
}

void GaConfig::validate() const
{
    if (population_size < 2)
        throw ConfigError("fatt: population size must be >= 2");
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0))
        throw ConfigError("fatt: weights must be non-negative with a positive sum");
    auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!probability(crossover_probability) || !probability(mutation_probability))
        throw ConfigError("fatt: probabilities must lie in [0, 1]");
    if (elitism >= population_size)
        throw ConfigError("fatt: elitism must be smaller than the population");
    if (max_depth_cap < 1)
        throw ConfigError("fatt: max depth cap must be >= 1");
    if (min_leaf_size < 1)
        throw ConfigError("fatt: min leaf size must be >= 1");
    if (fairness_sample_size && *fairness_sample_size < 1)
        throw ConfigError("fatt: fairness sample size must be >= 1");
}

FitnessContext make_fitness_context(const LabeledDataset& train, const Similarity& similarity, const GaConfig& cfg)
{
    FitnessContext ctx;
    ctx.train = &train;
    ctx.similarity = similarity;
    ctx.alpha = cfg.alpha;
    ctx.beta = cfg.beta;
    if (cfg.fairness_sample_size && *cfg.fairness_sample_size < train.size()) {
        std::vector<std::size_t> idx(train.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng = Rng(cfg.seed).derive(0xfa17);
        const std::size_t k = *cfg.fairness_sample_size;
        for (std::size_t i = 0; i < k; ++i)
            std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        ctx.fairness_set = train.subset(idx);
    } else {
        ctx.fairness_set = train;
    }
    return ctx;
}

Individual fitness(const DecisionTree& tree, const FitnessContext& ctx)
{
    Individual ind;
    ind.tree = tree;
    ind.accuracy = accuracy(tree, *ctx.train);
    ind.fairness = fairness_metric(Forest::from_tree(tree), ctx.fairness_set, ctx.similarity, AnalysisConfig{}).ratio;
    ind.fitness = ctx.alpha * ind.accuracy + ctx.beta * ind.fairness;
    return ind;
}

Individual fitness(const DecisionTree& tree, const LabeledDataset& train, const Similarity& similarity,
                   const GaConfig& cfg)
{
    return fitness(tree, make_fitness_context(train, similarity, cfg));
}

std::size_t select_roulette(std::span<const double> fitness, Rng& rng)
{
    if (fitness.empty())
        throw ConfigError("roulette selection on an empty population");
    const double total = std::accumulate(fitness.begin(), fitness.end(), 0.0);
    if (!(total > 0.0))
        return rng.uniform_index(fitness.size());
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        if (fitness[i] <= 0.0)
            continue;
        acc += fitness[i];
        last_positive = i;
        if (target < acc)
            return i;
    }
    return last_positive;
}

std::size_t select_roulette(std::span<const Individual> population, Rng& rng)
{
    std::vector<double> f;
    f.reserve(population.size());
    for (const auto& ind : population)
        f.push_back(ind.fitness);
    return select_roulette(f, rng);
}

DecisionTree crossover(const DecisionTree& t1, const DecisionTree& t2, std::size_t max_depth_cap, Rng& rng)
{
    const std::size_t at = rng.uniform_index(t1.node_count());
    const std::size_t from = rng.uniform_index(t2.node_count());
    return t1.replace_subtree(at, t2.subtree(from)).truncate(max_depth_cap);
}

namespace {

std::vector<std::vector<std::size_t>> route(const DecisionTree& tree, const LabeledDataset& train)
{
    std::vector<std::vector<std::size_t>> rows(tree.node_count());
    for (std::size_t i = 0; i < train.size(); ++i)
        rows[tree.leaf_index(train.samples[i])].push_back(i);
    return rows;
}

std::vector<double> label_counts(const LabeledDataset& train, std::span<const std::size_t> rows)
{
    std::vector<double> c(train.label_count(), 0.0);
    for (auto r : rows)
        c[static_cast<std::size_t>(train.labels[r])] += 1.0;
    return c;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng)
{
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

} // namespace

DecisionTree grow(const DecisionTree& tree, const LabeledDataset& train, std::size_t min_leaf_size,
                  std::size_t max_depth_cap, Rng& rng)
{
    const auto rows = route(tree, train);
    const auto depths = tree.node_depths();
    std::vector<std::size_t> candidates;
    for (auto leaf : tree.leaves())
        if (rows[leaf].size() >= 2 * min_leaf_size && depths[leaf] < max_depth_cap)
            candidates.push_back(leaf);
    shuffle(candidates, rng);

    std::vector<std::size_t> features(tree.num_features());
    std::iota(features.begin(), features.end(), 0);
    for (auto leaf : candidates) {
        const auto& routed = rows[leaf];
        shuffle(features, rng);
        for (auto f : features) {
            std::vector<double> values;
            values.reserve(routed.size());
            for (auto r : routed)
                values.push_back(train.samples[r][f]);
            std::sort(values.begin(), values.end());
            // a threshold between values[k] and values[k + 1] sends k + 1 samples to the true side
            std::vector<std::size_t> cuts;
            for (std::size_t k = min_leaf_size - 1; k + min_leaf_size < values.size(); ++k)
                if (values[k] < values[k + 1])
                    cuts.push_back(k);
            if (cuts.empty())
                continue;
            const std::size_t k = cuts[rng.uniform_index(cuts.size())];
            double threshold = values[k] + (values[k + 1] - values[k]) / 2.0;
            if (!(threshold < values[k + 1]))
                threshold = values[k];

            std::vector<std::size_t> below, above;
            for (auto r : routed)
                (train.samples[r][f] <= threshold ? below : above).push_back(r);
            TreeNode split;
            split.feature = static_cast<std::int32_t>(f);
            split.threshold = threshold;
            split.if_false = 1;
            split.if_true = 2;
            std::vector<TreeNode> nodes{split, make_leaf(label_counts(train, above)),
                                        make_leaf(label_counts(train, below))};
            return tree.replace_subtree(leaf, DecisionTree(tree.num_features(), tree.num_labels(), std::move(nodes)));
        }
    }
    return tree;
}

DecisionTree prune(const DecisionTree& tree, Rng& rng)
{
    const auto internal = tree.internal_nodes();
    if (internal.empty())
        return tree;
    return tree.collapse(internal[rng.uniform_index(internal.size())]);
}

DecisionTree mutate(const DecisionTree& tree, MutationMode mode, const LabeledDataset& train,
                    std::size_t min_leaf_size, std::size_t max_depth_cap, Rng& rng)
{
    if (mode == MutationMode::GrowAndPrune && rng.bernoulli(0.5))
        return prune(tree, rng);
    return grow(tree, train, min_leaf_size, max_depth_cap, rng);
}

DecisionTree refit_leaves(const DecisionTree& tree, const LabeledDataset& train)
{
    const std::size_t n = tree.node_count();
    const std::size_t labels = tree.num_labels();
    std::vector<std::size_t> parent(n, n);
    for (std::size_t i = 0; i < n; ++i)
        if (!tree.node(i).is_leaf()) {
            parent[tree.node(i).if_false] = i;
            parent[tree.node(i).if_true] = i;
        }

    std::vector<std::vector<double>> counts(n, std::vector<double>(labels, 0.0));
    for (std::size_t s = 0; s < train.size(); ++s) {
        const auto& x = train.samples[s];
        const auto y = static_cast<std::size_t>(train.labels[s]);
        if (x.size() != tree.num_features())
            throw DataError("refit: sample width does not match the tree");
        std::size_t i = 0;
        for (;;) {
            counts[i][y] += 1.0;
            const auto& node = tree.node(i);
            if (node.is_leaf())
                break;
            i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.if_true : node.if_false;
        }
    }
    auto reached = [&](std::size_t i) {
        return std::any_of(counts[i].begin(), counts[i].end(), [](double c) { return c > 0.0; });
    };

    std::vector<TreeNode> nodes = tree.nodes();
    for (std::size_t i = 0; i < n; ++i) {
        if (!nodes[i].is_leaf())
            continue;
        if (reached(i)) {
            nodes[i] = make_leaf(counts[i]);
            continue;
        }
        std::size_t a = parent[i];
        while (a < n && !reached(a))
            a = parent[a];
        const std::vector<double> fallback =
            a < n ? make_leaf(counts[a]).distribution : tree.node(i).distribution;
        nodes[i] = make_leaf(std::vector<double>(labels, 0.0), fallback);
    }
    return DecisionTree(tree.num_features(), labels, std::move(nodes));
}

FattResult train_fatt(const LabeledDataset& train, const Similarity& similarity, const GaConfig& cfg,
                      std::size_t jobs)
{
    cfg.validate();
    if (train.empty())
        throw DataError("fatt: empty training set");
    const FitnessContext ctx = make_fitness_context(train, similarity, cfg);
    Rng rng(cfg.seed);
    const std::size_t pop = cfg.population_size;

    std::vector<DecisionTree> trees;
    trees.reserve(pop);
    const std::size_t n_cart = pop / 2;
    const DecisionTree root_leaf = refit_leaves(
        DecisionTree::single_leaf(train.schema.dimension(), train.label_count(),
                                  std::vector<double>(train.label_count(), 0.0)),
        train);
    for (std::size_t i = 0; i < pop; ++i) {
        const auto depth = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(cfg.max_depth_cap)));
        if (i < n_cart) {
            std::vector<std::size_t> rows(train.size());
            for (auto& r : rows)
                r = rng.uniform_index(train.size());
            CartParams p{Criterion::Gini, depth, cfg.min_leaf_size};
            trees.push_back(refit_leaves(train_cart_on(train, rows, p), train));
        } else {
            DecisionTree t = root_leaf;
            for (std::size_t g = 0; g < depth; ++g)
                t = grow(t, train, cfg.min_leaf_size, cfg.max_depth_cap, rng);
            trees.push_back(refit_leaves(t, train));
        }
    }

    std::vector<Individual> population(pop);
    parallel_for(pop, jobs, [&](std::size_t i) { population[i] = fitness(trees[i], ctx); });

    Individual best = population.front();
    auto track = [&](std::size_t generation) {
        double sum = 0.0;
        for (const auto& ind : population) {
            sum += ind.fitness;
            if (ind.fitness > best.fitness)
                best = ind;
        }
        return GenerationLog{generation,     best.fitness,  sum / static_cast<double>(pop),
                             best.accuracy, best.fairness, best.tree.leaf_count()};
    };

    FattResult result;
    result.log.push_back(track(0));
    for (std::size_t gen = 1; gen <= cfg.iterations; ++gen) {
        std::vector<std::size_t> order(pop);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return population[a].fitness > population[b].fitness; });
        std::vector<double> f(pop);
        for (std::size_t i = 0; i < pop; ++i)
            f[i] = population[i].fitness;

        std::vector<Individual> next;
        next.reserve(pop);
        for (std::size_t e = 0; e < cfg.elitism; ++e)
            next.push_back(population[order[e]]);
        std::vector<DecisionTree> children;
        while (next.size() + children.size() < pop) {
            const std::size_t a = select_roulette(f, rng);
            const std::size_t b = select_roulette(f, rng);
            DecisionTree child = population[a].tree;
            if (rng.bernoulli(cfg.crossover_probability))
                child = crossover(population[a].tree, population[b].tree, cfg.max_depth_cap, rng);
            if (rng.bernoulli(cfg.mutation_probability))
                child = mutate(child, cfg.mutation, train, cfg.min_leaf_size, cfg.max_depth_cap, rng);
            children.push_back(refit_leaves(child, train));
        }
        const std::size_t base = next.size();
        next.resize(pop);
        parallel_for(children.size(), jobs, [&](std::size_t i) { next[base + i] = fitness(children[i], ctx); });
        population = std::move(next);
        result.log.push_back(track(gen));
    }
    result.best = std::move(best);
    return result;
}

std::string log_to_csv(const std::vector<GenerationLog>& log)
{
    std::ostringstream out;
    out << "generation,best_fitness,mean_fitness,best_accuracy,best_fairness,best_leaf_count\n";
    char buf[160];
    for (const auto& g : log) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f,%zu\n", g.generation, g.best_fitness,
                      g.mean_fitness, g.best_accuracy, g.best_fairness, g.best_leaf_count);
        out << buf;
    }
    return out.str();
}

} // namespace fairtree
