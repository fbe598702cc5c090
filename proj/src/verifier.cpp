#include "fairtree/verifier.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "fairtree/error.hpp"
#include "fairtree/parallel.hpp"

namespace fairtree {

using Clock = std::chrono::steady_clock;

std::vector<LeafConstraintSet> leaf_constraints(const DecisionTree& tree)
{
    struct Bounds {
        std::optional<double> le; // tightest x <= k
        std::optional<double> gt; // tightest x > k
    };
    struct Frame {
        std::size_t node;
        std::map<std::size_t, Bounds> bounds;
    };

    std::vector<LeafConstraintSet> out;
    std::vector<Frame> stack{{0, {}}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const auto& n = tree.node(f.node);
        if (n.is_leaf()) {
            LeafConstraintSet set{f.node, {}};
            for (const auto& [column, b] : f.bounds) {
                if (b.gt)
                    set.constraints.push_back({column, Constraint::Op::Gt, *b.gt});
                if (b.le)
                    set.constraints.push_back({column, Constraint::Op::Le, *b.le});
            }
            out.push_back(std::move(set));
            continue;
        }
        const auto column = static_cast<std::size_t>(n.feature);
        Frame on_true{n.if_true, f.bounds};
        auto& bt = on_true.bounds[column];
        bt.le = bt.le ? std::min(*bt.le, n.threshold) : n.threshold;
        Frame on_false{n.if_false, std::move(f.bounds)};
        auto& bf = on_false.bounds[column];
        bf.gt = bf.gt ? std::max(*bf.gt, n.threshold) : n.threshold;
        stack.push_back(std::move(on_true));
        stack.push_back(std::move(on_false));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.leaf < b.leaf; });
    return out;
}

TreeAnalysis analyze_tree(const DecisionTree& tree, const ReducedAbstractValue& v)
{
    TreeAnalysis out;
    if (v.is_bottom())
        return out;
    std::vector<std::pair<std::size_t, ReducedAbstractValue>> stack;
    stack.emplace_back(0, v);
    while (!stack.empty()) {
        auto [i, value] = std::move(stack.back());
        stack.pop_back();
        const auto& n = tree.node(i);
        if (n.is_leaf()) {
            out.labels.merge(tree.leaf_labels(i));
            out.leaves.push_back({i, std::move(value)});
            continue;
        }
        const auto column = static_cast<std::size_t>(n.feature);
        ReducedAbstractValue on_true = value;
        const bool true_ok = on_true.refine({column, Constraint::Op::Le, n.threshold});
        const bool false_ok = value.refine({column, Constraint::Op::Gt, n.threshold});
        // true branch pushed first so leaves come out in preorder
        if (true_ok)
            stack.emplace_back(n.if_true, std::move(on_true));
        if (false_ok)
            stack.emplace_back(n.if_false, std::move(value));
    }
    return out;
}

LabelSet analyze_tree_by_constraints(const DecisionTree& tree, const ReducedAbstractValue& v)
{
    LabelSet out;
    for (const auto& leaf : leaf_constraints(tree))
        if (satisfies(v, leaf.constraints))
            out.merge(tree.leaf_labels(leaf.leaf));
    return out;
}

void AnalysisConfig::validate() const
{
    if (timeout && timeout->count() <= 0)
        throw ConfigError("analysis timeout must be positive");
    if (clock_stride == 0)
        throw ConfigError("clock stride must be positive");
}

const char* status_keyword(Status s)
{
    switch (s) {
    case Status::Stable:
        return "stable";
    case Status::Unstable:
        return "unstable";
    case Status::Unknown:
        return "unknown";
    }
    return "?";
}

namespace {

using Tally = std::vector<std::int64_t>;

/// Per-tree vote contribution of every leaf.
struct VoteTable {
    std::int64_t unit = 1;
    std::vector<std::vector<Tally>> leaf_votes; // [tree][node] (empty for internal nodes)

    explicit VoteTable(const Forest& forest) : unit(vote_unit(forest.num_labels()))
    {
        const auto labels = forest.num_labels();
        for (const auto& t : forest.trees()) {
            std::vector<Tally> per_node(t.node_count());
            for (auto leaf : t.leaves()) {
                const auto winners = t.leaf_labels(leaf);
                Tally votes(labels, 0);
                for (int l : winners)
                    votes[static_cast<std::size_t>(l)] = unit / static_cast<std::int64_t>(winners.size());
                per_node[leaf] = std::move(votes);
            }
            leaf_votes.push_back(std::move(per_node));
        }
    }
};

/// Bounds on what trees k..T-1 can still add to each label over a region.
struct RemainingGain {
    std::vector<Tally> max_gain; // [k][label], k in [0, T]
    std::vector<Tally> min_gain;
};

struct SearchState {
    std::size_t tree = 0; // next tree to expand
    ReducedAbstractValue value;
    Tally tally;
    std::int64_t margin = 0;
    std::uint64_t seq = 0;
};

struct StateOrder {
    bool operator()(const SearchState& a, const SearchState& b) const
    {
        // max-heap: larger margin, then deeper, then older first
        if (a.margin != b.margin)
            return a.margin < b.margin;
        if (a.tree != b.tree)
            return a.tree < b.tree;
        return a.seq > b.seq;
    }
};

/// Largest slack by which some final outcome could still differ from
/// `expected`, or nullopt when every completion votes exactly `expected`.
///
/// An outcome differs when some label outside `expected` reaches the top
/// (it must then be >= every expected label) or when some expected label
/// falls strictly below another label. Each test uses optimistic final
/// tallies: current + max gain for the challenger, current + min gain for
/// the expected label.
std::optional<std::int64_t> disagreement_margin(const Tally& tally, const Tally& max_gain, const Tally& min_gain,
                                                const LabelSet& expected)
{
    const std::size_t labels = tally.size();
    std::optional<std::int64_t> best;
    auto consider = [&](std::int64_t m) { best = best ? std::max(*best, m) : m; };
    for (std::size_t y = 0; y < labels; ++y) {
        const std::int64_t hi_y = tally[y] + max_gain[y];
        if (!expected.contains(static_cast<int>(y))) {
            std::int64_t slack = INT64_MAX;
            for (int e : expected)
                slack = std::min(slack, hi_y - (tally[static_cast<std::size_t>(e)] + min_gain[static_cast<std::size_t>(e)]));
            if (slack >= 0)
                consider(slack);
        }
        for (int e : expected) {
            if (static_cast<std::size_t>(e) == y)
                continue;
            const std::int64_t gap = hi_y - (tally[static_cast<std::size_t>(e)] + min_gain[static_cast<std::size_t>(e)]);
            if (gap > 0)
                consider(gap);
        }
    }
    return best;
}

double squared_distance(const Sample& a, const Sample& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

} // namespace

Verdict analyze_forest(const Forest& forest, std::span<const ReducedAbstractValue> regions, const LabelSet& expected,
                       const AnalysisConfig& cfg, const Sample* reference)
{
    cfg.validate();
    if (expected.empty())
        throw ConfigError("analyze_forest: expected label set is empty");
    const auto start = Clock::now();
    const std::optional<Clock::time_point> deadline =
        cfg.timeout ? std::optional<Clock::time_point>(start + *cfg.timeout) : std::nullopt;

    const VoteTable votes(forest);
    const std::size_t trees = forest.size();
    const std::size_t labels = forest.num_labels();

    Verdict verdict;
    verdict.labels = expected;
    LabelSet reachable = expected; // sound superset of every output label
    std::size_t expansions = 0;

    auto finish = [&](Status status) {
        verdict.status = status;
        verdict.elapsed = Clock::now() - start;
        verdict.states = expansions;
        if (status == Status::Unknown)
            verdict.labels = reachable;
        return verdict;
    };

    // Per-tree reachability on each unrefined region bounds what the
    // remaining trees can add to a tally, and gives the label superset
    // reported on timeout.
    std::vector<RemainingGain> gains(regions.size());
    for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto& region = regions[r];
        if (region.is_bottom())
            continue;
        auto& gain = gains[r];
        gain.max_gain.assign(trees + 1, Tally(labels, 0));
        gain.min_gain.assign(trees + 1, Tally(labels, 0));
        for (std::size_t t = trees; t-- > 0;) {
            const auto& tree = forest.tree(t);
            const auto analysis = analyze_tree(tree, region);
            reachable.merge(analysis.labels);
            for (std::size_t y = 0; y < labels; ++y) {
                std::int64_t mx = 0;
                std::int64_t mn = INT64_MAX;
                for (const auto& leaf : analysis.leaves) {
                    const auto v = votes.leaf_votes[t][leaf.leaf][y];
                    mx = std::max(mx, v);
                    mn = std::min(mn, v);
                }
                gain.max_gain[t][y] = gain.max_gain[t + 1][y] + mx;
                gain.min_gain[t][y] = gain.min_gain[t + 1][y] + mn;
            }
        }
    }

    for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto& region = regions[r];
        if (region.is_bottom())
            continue;
        const auto& gain = gains[r];
        std::priority_queue<SearchState, std::vector<SearchState>, StateOrder> frontier;
        std::uint64_t seq = 0;
        const Tally zero(labels, 0);
        if (auto m = disagreement_margin(zero, gain.max_gain[0], gain.min_gain[0], expected))
            frontier.push({0, region, zero, *m, seq++});

        while (!frontier.empty()) {
            if (deadline && ++expansions % cfg.clock_stride == 0 && Clock::now() >= *deadline)
                return finish(Status::Unknown);
            if (!deadline)
                ++expansions;
            SearchState state = frontier.top();
            frontier.pop();

            const auto analysis = analyze_tree(forest.tree(state.tree), state.value);
            const std::size_t next = state.tree + 1;
            std::optional<Counterexample> found;
            double found_distance = 0.0;
            for (const auto& leaf : analysis.leaves) {
                Tally tally = state.tally;
                const auto& v = votes.leaf_votes[state.tree][leaf.leaf];
                for (std::size_t y = 0; y < labels; ++y)
                    tally[y] += v[y];
                if (next == trees) {
                    const LabelSet outcome = tally_winners(tally);
                    if (outcome == expected)
                        continue;
                    // among sibling completions, report the witness nearest the query
                    Sample witness = leaf.value.witness();
                    const double distance = reference ? squared_distance(witness, *reference) : 0.0;
                    if (found && distance >= found_distance)
                        continue;
                    Counterexample cex;
                    cex.region = r;
                    cex.witness = std::move(witness);
                    cex.witness_labels = forest.predict(cex.witness);
                    if (cex.witness_labels != outcome)
                        throw Error("analyze_forest: witness does not reproduce the abstract outcome");
                    found = std::move(cex);
                    found_distance = distance;
                    continue;
                }
                if (auto m = disagreement_margin(tally, gain.max_gain[next], gain.min_gain[next], expected))
                    frontier.push({next, leaf.value, std::move(tally), *m, seq++});
            }
            if (found) {
                if (reference) {
                    found->reference = *reference;
                    found->reference_labels = forest.predict(*reference);
                }
                verdict.labels.merge(found->witness_labels);
                verdict.counterexample = std::move(found);
                return finish(Status::Unstable);
            }
        }
    }
    return finish(Status::Stable);
}

Verdict is_stable(const Forest& forest, std::span<const double> x, std::span<const ReducedAbstractValue> regions,
                  const AnalysisConfig& cfg)
{
    const Sample reference(x.begin(), x.end());
    return analyze_forest(forest, regions, forest.predict(x), cfg, &reference);
}

Verdict is_stable(const Model& model, std::span<const double> x, std::span<const ReducedAbstractValue> regions,
                  const AnalysisConfig& cfg)
{
    return is_stable(as_forest(model), x, regions, cfg);
}

Verdict is_fair(const Forest& forest, std::span<const double> x, const Similarity& similarity,
                const std::shared_ptr<const ColumnLayout>& layout, const AnalysisConfig& cfg)
{
    const auto regions = from_similarity(x, similarity, layout);
    return is_stable(forest, x, regions, cfg);
}

Verdict is_fair(const Model& model, std::span<const double> x, const Similarity& similarity,
                const std::shared_ptr<const ColumnLayout>& layout, const AnalysisConfig& cfg)
{
    return is_fair(as_forest(model), x, similarity, layout, cfg);
}

bool is_robust(const Forest& forest, std::span<const double> x, int y, std::span<const ReducedAbstractValue> regions,
               const AnalysisConfig& cfg)
{
    return is_stable(forest, x, regions, cfg).status == Status::Stable && forest.predict(x) == LabelSet::single(y);
}

FairnessResult fairness_metric(const Forest& forest, const LabeledDataset& data, const Similarity& similarity,
                               const AnalysisConfig& cfg, std::size_t jobs)
{
    if (data.empty())
        throw DataError("fairness_metric: empty dataset");
    cfg.validate();
    const auto layout = std::make_shared<const ColumnLayout>(data.schema);
    FairnessResult out;
    out.verdicts.resize(data.size());
    parallel_for(data.size(), jobs, [&](std::size_t i) {
        out.verdicts[i] = is_fair(forest, data.samples[i], similarity, layout, cfg);
    });
    double total_ms = 0.0;
    for (const auto& v : out.verdicts) {
        switch (v.status) {
        case Status::Stable:
            ++out.stable;
            break;
        case Status::Unstable:
            ++out.unstable;
            break;
        case Status::Unknown:
            ++out.unknown;
            break;
        }
        total_ms += std::chrono::duration<double, std::milli>(v.elapsed).count();
    }
    out.ratio = static_cast<double>(out.stable) / static_cast<double>(data.size());
    out.mean_time_ms = total_ms / static_cast<double>(data.size());
    return out;
}

FairnessResult fairness_metric(const Model& model, const LabeledDataset& data, const Similarity& similarity,
                               const AnalysisConfig& cfg, std::size_t jobs)
{
    return fairness_metric(as_forest(model), data, similarity, cfg, jobs);
}

} // namespace fairtree
