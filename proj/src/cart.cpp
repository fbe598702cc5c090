#include "fairtree/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairtree/dataset_io.hpp"
#include "fairtree/error.hpp"
#include "fairtree/metrics.hpp"
#include "fairtree/parallel.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

const char* criterion_keyword(Criterion c)
{
    return c == Criterion::Gini ? "gini" : "entropy";
}

Criterion parse_criterion(const std::string& s)
{
    if (s == "gini")
        return Criterion::Gini;
    if (s == "entropy")
        return Criterion::Entropy;
    throw ConfigError("unknown split criterion '" + s + "'");
}

double gini(std::span<const double> counts)
{
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n <= 0.0)
        return 0.0;
    double sum_sq = 0.0;
    for (double c : counts)
        sum_sq += (c / n) * (c / n);
    return 1.0 - sum_sq;
}

double entropy(std::span<const double> counts)
{
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n <= 0.0)
        return 0.0;
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) {
            const double p = c / n;
            h -= p * std::log2(p);
        }
    return h;
}

double impurity(Criterion c, std::span<const double> counts)
{
    return c == Criterion::Gini ? gini(counts) : entropy(counts);
}

void CartParams::validate() const
{
    if (max_depth < 1)
        throw ConfigError("cart: max_depth must be >= 1");
    if (min_samples_leaf < 1)
        throw ConfigError("cart: min_samples_leaf must be >= 1");
}

void RfParams::validate() const
{
    cart.validate();
    if (n_trees < 1)
        throw ConfigError("rf: n_trees must be >= 1");
    if (feature_fraction && !(*feature_fraction > 0.0 && *feature_fraction <= 1.0))
        throw ConfigError("rf: feature fraction must lie in (0, 1]");
}

namespace {

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = -1.0;
    bool found = false;
};

class CartBuilder {
public:
    CartBuilder(const LabeledDataset& data, const CartParams& params, Rng* rng, std::size_t features_per_node)
        : data_(data), params_(params), rng_(rng), features_per_node_(features_per_node),
          labels_(data.label_count()), d_(data.schema.dimension())
    {
    }

    DecisionTree build(std::vector<std::size_t> rows)
    {
        nodes_.clear();
        grow(std::move(rows), 0);
        return DecisionTree(d_, labels_, std::move(nodes_));
    }

private:
    std::vector<double> count(const std::vector<std::size_t>& rows) const
    {
        std::vector<double> c(labels_, 0.0);
        for (auto r : rows)
            c[static_cast<std::size_t>(data_.labels[r])] += 1.0;
        return c;
    }

    std::vector<std::size_t> candidate_features()
    {
        std::vector<std::size_t> all(d_);
        std::iota(all.begin(), all.end(), 0);
        if (!rng_ || features_per_node_ >= d_)
            return all;
        // partial Fisher-Yates, then ascending order for the tie rule
        for (std::size_t i = 0; i < features_per_node_; ++i)
            std::swap(all[i], all[i + rng_->uniform_index(d_ - i)]);
        all.resize(features_per_node_);
        std::sort(all.begin(), all.end());
        return all;
    }

    Split best_split(const std::vector<std::size_t>& rows, const std::vector<double>& parent_counts)
    {
        const double n = static_cast<double>(rows.size());
        const double parent_impurity = impurity(params_.criterion, parent_counts);
        const std::size_t min_leaf = params_.min_samples_leaf;
        Split best;
        std::vector<std::pair<double, int>> column(rows.size());
        std::vector<double> left(labels_), right(labels_);
        for (auto f : candidate_features()) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                column[i] = {data_.samples[rows[i]][f], data_.labels[rows[i]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first)
                continue;
            std::fill(left.begin(), left.end(), 0.0);
            right = parent_counts;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                const auto l = static_cast<std::size_t>(column[i].second);
                left[l] += 1.0;
                right[l] -= 1.0;
                if (column[i].first == column[i + 1].first)
                    continue;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = column.size() - n_left;
                if (n_left < min_leaf || n_right < min_leaf)
                    continue;
                const double gain = parent_impurity -
                                    (static_cast<double>(n_left) / n) * impurity(params_.criterion, left) -
                                    (static_cast<double>(n_right) / n) * impurity(params_.criterion, right);
                if (gain > best.gain + 1e-12) {
                    double threshold = column[i].first / 2 + column[i + 1].first / 2;
                    if (!(threshold < column[i + 1].first))
                        threshold = column[i].first;
                    best = {f, threshold, gain, true};
                }
            }
        }
        return best;
    }

    void grow(std::vector<std::size_t> rows, std::size_t depth)
    {
        auto counts = count(rows);
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        if (depth >= params_.max_depth || pure || rows.size() < 2 * params_.min_samples_leaf) {
            nodes_.push_back(make_leaf(std::move(counts)));
            return;
        }
        const Split split = best_split(rows, counts);
        if (!split.found) {
            nodes_.push_back(make_leaf(std::move(counts)));
            return;
        }
        std::vector<std::size_t> on_true, on_false;
        for (auto r : rows)
            (data_.samples[r][split.feature] <= split.threshold ? on_true : on_false).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const std::size_t self = nodes_.size();
        TreeNode node;
        node.feature = static_cast<std::int32_t>(split.feature);
        node.threshold = split.threshold;
        nodes_.push_back(std::move(node));
        nodes_[self].if_false = static_cast<std::uint32_t>(nodes_.size());
        grow(std::move(on_false), depth + 1);
        nodes_[self].if_true = static_cast<std::uint32_t>(nodes_.size());
        grow(std::move(on_true), depth + 1);
    }

    const LabeledDataset& data_;
    const CartParams& params_;
    Rng* rng_;
    std::size_t features_per_node_;
    std::size_t labels_;
    std::size_t d_;
    std::vector<TreeNode> nodes_;
};

} // namespace

DecisionTree train_cart_on(const LabeledDataset& train, std::span<const std::size_t> rows, const CartParams& params)
{
    params.validate();
    if (rows.empty())
        throw DataError("cart: empty training set");
    CartBuilder builder(train, params, nullptr, train.schema.dimension());
    return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

DecisionTree train_cart(const LabeledDataset& train, const CartParams& params)
{
    std::vector<std::size_t> rows(train.size());
    std::iota(rows.begin(), rows.end(), 0);
    return train_cart_on(train, rows, params);
}

Forest train_rf(const LabeledDataset& train, const RfParams& params, std::size_t jobs)
{
    params.validate();
    if (train.empty())
        throw DataError("rf: empty training set");
    const std::size_t d = train.schema.dimension();
    const std::size_t per_node =
        params.feature_fraction
            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(*params.feature_fraction * static_cast<double>(d))))
            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    const Rng master(params.seed);
    std::vector<DecisionTree> trees(params.n_trees);
    parallel_for(params.n_trees, jobs, [&](std::size_t t) {
        Rng rng = master.derive(t);
        std::vector<std::size_t> rows(train.size());
        if (params.bootstrap) {
            for (auto& r : rows)
                r = rng.uniform_index(train.size());
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        CartBuilder builder(train, params.cart, &rng, per_node);
        trees[t] = builder.build(std::move(rows));
    });
    return Forest(std::move(trees));
}

CartGrid default_cart_grid()
{
    CartGrid g;
    for (std::size_t depth = 5; depth <= 95; depth += 10)
        g.depths.push_back(depth);
    return g;
}

RfGrid default_rf_grid()
{
    RfGrid g;
    for (std::size_t depth = 5; depth <= 95; depth += 10)
        g.depths.push_back(depth);
    for (std::size_t n = 5; n <= 95; n += 10)
        g.n_trees.push_back(n);
    return g;
}

namespace {

template <typename Params>
void pick_best(TuneResult<Params>& result)
{
    if (result.entries.empty())
        throw ConfigError("tune: empty grid");
    const TuneEntry<Params>* best = &result.entries.front();
    for (const auto& e : result.entries)
        if (e.validation_accuracy > best->validation_accuracy ||
            (e.validation_accuracy == best->validation_accuracy && e.leaf_count < best->leaf_count))
            best = &e;
    result.best = best->params;
    result.best_accuracy = best->validation_accuracy;
}

} // namespace

TuneResult<CartParams> tune_cart(const LabeledDataset& train, const CartGrid& grid, std::uint64_t seed)
{
    const auto [fit, validation] = split(train, 0.2, seed);
    TuneResult<CartParams> result;
    for (auto criterion : grid.criteria)
        for (auto depth : grid.depths) {
            CartParams p{criterion, depth, grid.min_samples_leaf};
            const auto tree = train_cart(fit, p);
            result.entries.push_back({p, accuracy(Model(tree), validation), tree.leaf_count()});
        }
    pick_best(result);
    return result;
}

TuneResult<RfParams> tune_rf(const LabeledDataset& train, const RfGrid& grid, std::uint64_t seed, std::size_t jobs)
{
    const auto [fit, validation] = split(train, 0.2, seed);
    TuneResult<RfParams> result;
    for (auto criterion : grid.criteria)
        for (auto depth : grid.depths)
            for (auto n : grid.n_trees) {
                RfParams p;
                p.n_trees = n;
                p.cart = {criterion, depth, 1};
                p.bootstrap = grid.bootstrap;
                p.seed = seed;
                const auto forest = train_rf(fit, p, jobs);
                result.entries.push_back({p, accuracy(Model(forest), validation), forest.leaf_count()});
            }
    pick_best(result);
    return result;
}

DecisionTree train_hinted_cart(const LabeledDataset& train, const DecisionTree& hint, Criterion criterion)
{
    if (train.empty())
        throw DataError("hinted cart: empty training set");
    std::optional<double> min_count;
    for (auto leaf : hint.leaves()) {
        const double c = hint.node(leaf).sample_count();
        if (c > 0.0)
            min_count = min_count ? std::min(*min_count, c) : c;
    }
    if (!min_count)
        throw ConfigError("hinted cart: hint tree carries no leaf sample counts");
    const std::size_t depth = hint.depth();
    if (depth == 0) {
        std::vector<double> counts(train.label_count(), 0.0);
        for (int y : train.labels)
            counts[static_cast<std::size_t>(y)] += 1.0;
        return DecisionTree::single_leaf(train.schema.dimension(), train.label_count(), std::move(counts));
    }
    CartParams p{criterion, depth, static_cast<std::size_t>(std::max(1.0, std::round(*min_count)))};
    return train_cart(train, p);
}

} // namespace fairtree
