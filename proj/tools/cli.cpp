#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairtree/cart.hpp"
#include "fairtree/dataset_io.hpp"
#include "fairtree/error.hpp"
#include "fairtree/fatt.hpp"
#include "fairtree/metrics.hpp"
#include "fairtree/model_io.hpp"
#include "fairtree/similarity.hpp"
#include "fairtree/synthetic.hpp"
#include "fairtree/verifier.hpp"

namespace fairtree::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kModelKinds{"rf", "cart", "fatt", "hinted-cart"};

/// Every knob a command may read. Defaults come from the library, then from
/// the --config file, then from flags.
struct Settings {
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    bool timing = false;
    std::int64_t timeout_ms = -1; // -1: no budget
    bool tune = false;
    CartParams cart;
    RfParams rf;
    GaConfig ga;
    std::size_t fairness_samples = 0; // 0: whole training set
    std::vector<std::size_t> grid_depths = default_cart_grid().depths;
    std::vector<std::size_t> grid_trees = default_rf_grid().n_trees;
};

void apply_config(const json& doc, Settings& s)
{
    try {
        s.seed = doc.value("seed", s.seed);
        s.jobs = doc.value("jobs", s.jobs);
        if (doc.contains("cart")) {
            const auto& c = doc.at("cart");
            if (c.contains("criterion"))
                s.cart.criterion = parse_criterion(c.at("criterion").get<std::string>());
            s.cart.max_depth = c.value("max_depth", s.cart.max_depth);
            s.cart.min_samples_leaf = c.value("min_samples_leaf", s.cart.min_samples_leaf);
        }
        if (doc.contains("rf")) {
            const auto& r = doc.at("rf");
            s.rf.n_trees = r.value("n_trees", s.rf.n_trees);
            s.rf.bootstrap = r.value("bootstrap", s.rf.bootstrap);
            if (r.contains("feature_fraction"))
                s.rf.feature_fraction = r.at("feature_fraction").get<double>();
        }
        if (doc.contains("fatt")) {
            const auto& f = doc.at("fatt");
            s.ga.population_size = f.value("population", s.ga.population_size);
            s.ga.iterations = f.value("iterations", s.ga.iterations);
            s.ga.alpha = f.value("alpha", s.ga.alpha);
            s.ga.beta = f.value("beta", s.ga.beta);
            if (f.contains("mutation"))
                s.ga.mutation = parse_mutation(f.at("mutation").get<std::string>());
            s.ga.crossover_probability = f.value("crossover_probability", s.ga.crossover_probability);
            s.ga.mutation_probability = f.value("mutation_probability", s.ga.mutation_probability);
            s.ga.elitism = f.value("elitism", s.ga.elitism);
            s.ga.max_depth_cap = f.value("max_depth_cap", s.ga.max_depth_cap);
            s.ga.min_leaf_size = f.value("min_leaf_size", s.ga.min_leaf_size);
            s.fairness_samples = f.value("fairness_sample_size", s.fairness_samples);
        }
        if (doc.contains("verifier"))
            s.timeout_ms = doc.at("verifier").value("timeout_ms", s.timeout_ms);
        if (doc.contains("grid")) {
            const auto& g = doc.at("grid");
            s.grid_depths = g.value("depths", s.grid_depths);
            s.grid_trees = g.value("trees", s.grid_trees);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
}

/// Loads the --config file named anywhere on the command line.
Settings initial_settings(const std::vector<std::string>& args)
{
    Settings s;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
        if (!path.empty())
            apply_config(read_json_file(path), s);
    }
    return s;
}

AnalysisConfig analysis_config(const Settings& s)
{
    AnalysisConfig cfg;
    if (s.timeout_ms != -1) {
        if (s.timeout_ms <= 0)
            throw ConfigError("--timeout-ms must be positive");
        cfg.timeout = std::chrono::milliseconds(s.timeout_ms);
    }
    return cfg;
}

GaConfig ga_config(const Settings& s)
{
    GaConfig g = s.ga;
    g.seed = s.seed;
    if (s.fairness_samples > 0)
        g.fairness_sample_size = s.fairness_samples;
    g.validate();
    return g;
}

struct LoadedData {
    LabeledDataset data;
    std::optional<StandardizationStats> stats;
};

LoadedData load_data(const std::string& path)
{
    LoadedData d;
    d.data = load_dataset(path, &d.stats);
    return d;
}

Similarity load_similarity(const std::string& path, const LoadedData& d, std::string* name = nullptr)
{
    const auto spec = SimilaritySpec::load(path);
    if (name)
        *name = spec.label();
    return resolve(spec, d.data.schema, d.stats ? &*d.stats : nullptr);
}

std::vector<NamedSimilarity> load_similarities(const std::vector<std::string>& paths, const LoadedData& d)
{
    std::vector<NamedSimilarity> out;
    for (const auto& p : paths) {
        NamedSimilarity ns;
        ns.similarity = load_similarity(p, d, &ns.name);
        out.push_back(std::move(ns));
    }
    return out;
}

void check_fingerprint(const std::string& fingerprint, const FeatureSchema& schema, const std::string& what)
{
    if (fingerprint != schema.fingerprint())
        throw DataError(what + " was built for a different schema (fingerprint " + fingerprint + ", dataset " +
                        schema.fingerprint() + ")");
}

ModelDocument load_checked_model(const std::string& path, const LabeledDataset& data)
{
    auto doc = load_model(path);
    check_fingerprint(doc.schema_fingerprint, data.schema, "model " + path);
    return doc;
}

std::string label_names(const LabelSet& labels, const FeatureSchema& schema)
{
    std::string s;
    for (int l : labels) {
        if (!s.empty())
            s += '|';
        s += schema.label_values.at(static_cast<std::size_t>(l));
    }
    return s;
}

std::string join_values(const Sample& x)
{
    std::string s;
    char buf[32];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", x[i]);
        if (i)
            s += ';';
        s += buf;
    }
    return s;
}

json cart_json(const CartParams& p)
{
    return {{"criterion", criterion_keyword(p.criterion)},
            {"max_depth", p.max_depth},
            {"min_samples_leaf", p.min_samples_leaf}};
}

json rf_json(const RfParams& p)
{
    json j = {{"n_trees", p.n_trees}, {"cart", cart_json(p.cart)}, {"bootstrap", p.bootstrap}};
    j["feature_fraction"] = p.feature_fraction ? json(*p.feature_fraction) : json();
    return j;
}

CartGrid cart_grid(const Settings& s)
{
    CartGrid g;
    g.depths = s.grid_depths;
    return g;
}

RfGrid rf_grid(const Settings& s)
{
    RfGrid g;
    g.depths = s.grid_depths;
    g.n_trees = s.grid_trees;
    g.bootstrap = s.rf.bootstrap;
    return g;
}

fs::path sibling(const fs::path& out, const std::string& suffix)
{
    fs::path p = out;
    p.replace_extension();
    return p.string() + suffix;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string kind;
    std::string dataset;
    std::string similarity;
    std::string hint_model;
    std::string out;
    std::string log;
};

/// Trains one model, writing its log lines to `log`.
Model train_model(const std::string& kind, const LoadedData& train, const Settings& s, const Similarity* similarity,
                  const DecisionTree* hint, std::ostream& log, std::string* generations_csv)
{
    if (kind == "cart") {
        CartParams p = s.cart;
        if (s.tune) {
            const auto t = tune_cart(train.data, cart_grid(s), s.seed);
            p = t.best;
            log << "tuned cart: " << cart_json(p).dump() << " validation accuracy " << t.best_accuracy << '\n';
        }
        return train_cart(train.data, p);
    }
    if (kind == "rf") {
        RfParams p = s.rf;
        p.cart = s.cart;
        if (s.tune) {
            const auto t = tune_rf(train.data, rf_grid(s), s.seed, s.jobs);
            p = t.best;
            log << "tuned rf: " << rf_json(p).dump() << " validation accuracy " << t.best_accuracy << '\n';
        }
        p.seed = s.seed;
        return train_rf(train.data, p, s.jobs);
    }
    if (kind == "fatt") {
        if (!similarity)
            throw ConfigError("training fatt needs --similarity");
        const auto result = train_fatt(train.data, *similarity, ga_config(s), s.jobs);
        const auto& last = result.log.back();
        log << "fatt: " << result.log.size() - 1 << " generations, best fitness " << last.best_fitness
            << ", training accuracy " << last.best_accuracy << ", training fairness " << last.best_fairness << '\n';
        if (generations_csv)
            *generations_csv = log_to_csv(result.log);
        return result.best.tree;
    }
    if (kind == "hinted-cart") {
        if (!hint)
            throw ConfigError("training hinted-cart needs --hint-model");
        return train_hinted_cart(train.data, *hint, s.cart.criterion);
    }
    throw ConfigError("unknown model kind '" + kind + "' (expected cart, rf, fatt or hinted-cart)");
}

DecisionTree hint_tree(const ModelDocument& doc)
{
    if (const auto* t = std::get_if<DecisionTree>(&doc.model))
        return *t;
    const auto& f = std::get<Forest>(doc.model);
    if (f.size() != 1)
        throw DataError("the hint model must be a single tree");
    return f.tree(0);
}

int cmd_train(const TrainArgs& a, const Settings& s, std::ostream& out)
{
    if (a.kind == "hinted-cart" && a.hint_model.empty())
        throw ConfigError("training hinted-cart needs --hint-model");
    const auto train = load_data(a.dataset);
    std::optional<Similarity> sim;
    if (!a.similarity.empty())
        sim = load_similarity(a.similarity, train);
    std::optional<DecisionTree> hint;
    if (!a.hint_model.empty())
        hint = hint_tree(load_checked_model(a.hint_model, train.data));

    std::ostringstream log;
    std::string generations;
    const Model model =
        train_model(a.kind, train, s, sim ? &*sim : nullptr, hint ? &*hint : nullptr, log, &generations);
    log << a.kind << ": leaves " << leaf_count(model) << ", training accuracy " << accuracy(model, train.data)
        << '\n';

    save_model(a.out, {model, train.data.schema.fingerprint()});
    const fs::path log_path = a.log.empty() ? sibling(a.out, a.kind == "fatt" ? ".log.csv" : ".log") : fs::path(a.log);
    write_text_file(log_path, a.kind == "fatt" ? generations : log.str());
    out << log.str() << "model written to " << a.out << '\n';
    return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    std::string model;
    std::string dataset;
    std::string similarity;
    std::string out;
};

int cmd_verify(const VerifyArgs& a, const Settings& s, std::ostream& out)
{
    const auto cfg = analysis_config(s);
    const auto data = load_data(a.dataset);
    const auto doc = load_checked_model(a.model, data.data);
    std::string sim_name;
    const auto sim = load_similarity(a.similarity, data, &sim_name);
    const auto result = fairness_metric(doc.model, data.data, sim, cfg, s.jobs);
    const auto& schema = data.data.schema;

    json agg = {
        {"model", fs::path(a.model).stem().string()},
        {"similarity", sim_name},
        {"samples", data.data.size()},
        {"fairness", result.ratio},
        {"stable", result.stable},
        {"unstable", result.unstable},
        {"unknown", result.unknown},
        {"timeout_ms", s.timeout_ms > 0 ? json(s.timeout_ms) : json()},
    };
    if (s.timing)
        agg["mean_time_ms"] = result.mean_time_ms;

    if (!a.out.empty()) {
        std::ostringstream csv;
        csv << "index,label,status,output,counterexample_output,counterexample";
        if (s.timing)
            csv << ",time_ms";
        csv << '\n';
        for (std::size_t i = 0; i < result.verdicts.size(); ++i) {
            const auto& v = result.verdicts[i];
            csv << i << ',' << schema.label_values.at(static_cast<std::size_t>(data.data.labels[i])) << ','
                << status_keyword(v.status) << ',' << label_names(v.labels, schema) << ',';
            if (v.counterexample)
                csv << label_names(v.counterexample->witness_labels, schema) << ','
                    << join_values(v.counterexample->witness);
            else
                csv << ',';
            if (s.timing) {
                char buf[32];
                std::snprintf(buf, sizeof buf, ",%.6f", std::chrono::duration<double, std::milli>(v.elapsed).count());
                csv << buf;
            }
            csv << '\n';
        }
        write_text_file(fs::path(a.out) / "verdicts.csv", csv.str());
        write_text_file(fs::path(a.out) / "aggregate.json", agg.dump(2) + '\n');
    }
    out << agg.dump(2) << '\n';
    return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::vector<std::string> models;
    std::string dataset;
    std::vector<std::string> similarities;
    std::string out;
};

void write_reports(const std::vector<EvaluationReport>& reports, const std::string& out_json, bool timing,
                   std::ostream& out)
{
    json arr = json::array();
    for (const auto& r : reports)
        arr.push_back(report_to_json(r, timing));
    const std::string table = render_table(reports, timing);
    if (!out_json.empty())
        write_text_file(out_json, arr.dump(2) + '\n');
    out << table;
}

int cmd_evaluate(const EvaluateArgs& a, const Settings& s, std::ostream& out)
{
    const auto cfg = analysis_config(s);
    const auto data = load_data(a.dataset);
    const auto sims = load_similarities(a.similarities, data);
    std::vector<EvaluationReport> reports;
    for (const auto& path : a.models) {
        const auto doc = load_checked_model(path, data.data);
        reports.push_back(evaluate(fs::path(path).stem().string(), doc.model, data.data, sims, cfg, s.jobs));
    }
    write_reports(reports, a.out, s.timing, out);
    return kOk;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::string dataset;
    std::string test;
    std::vector<std::string> similarities;
    std::vector<std::string> models = kModelKinds;
    std::string out;
};

int cmd_benchmark(const BenchmarkArgs& a, Settings s, std::ostream& out)
{
    for (const auto& m : a.models)
        if (std::find(kModelKinds.begin(), kModelKinds.end(), m) == kModelKinds.end())
            throw ConfigError("unknown model kind '" + m + "' in --models");
    const auto cfg = analysis_config(s);
    const auto train = load_data(a.dataset);
    const auto test = load_data(a.test);
    if (train.data.schema.fingerprint() != test.data.schema.fingerprint())
        throw DataError("training and test sets have different schemas");
    const auto sims = load_similarities(a.similarities, train);
    auto wants = [&](const std::string& k) { return std::find(a.models.begin(), a.models.end(), k) != a.models.end(); };
    s.tune = true;

    std::ostringstream log;
    std::optional<DecisionTree> fatt_tree;
    std::string generations;
    if (wants("fatt") || wants("hinted-cart")) {
        if (sims.empty())
            throw ConfigError("benchmarking fatt needs --similarity");
        fatt_tree = std::get<DecisionTree>(
            train_model("fatt", train, s, &sims.front().similarity, nullptr, log, &generations));
    }

    std::vector<EvaluationReport> reports;
    for (const auto& kind : a.models) {
        Model model = kind == "fatt" ? Model(*fatt_tree)
                                     : train_model(kind, train, s, nullptr, fatt_tree ? &*fatt_tree : nullptr, log,
                                                   nullptr);
        if (!a.out.empty())
            save_model(fs::path(a.out) / "models" / (kind + ".json"), {model, train.data.schema.fingerprint()});
        reports.push_back(evaluate(kind, model, test.data, sims, cfg, s.jobs));
    }

    out << log.str();
    if (!a.out.empty()) {
        write_text_file(fs::path(a.out) / "table.txt", render_table(reports, s.timing));
        write_text_file(fs::path(a.out) / "train.log", log.str());
        if (!generations.empty())
            write_text_file(fs::path(a.out) / "fatt.log.csv", generations);
    }
    write_reports(reports, a.out.empty() ? std::string() : (fs::path(a.out) / "report.json").string(), s.timing,
                  out);
    return kOk;
}

// ---------------------------------------------------------------- tune

struct TuneArgs {
    std::string kind;
    std::string dataset;
    std::string out;
};

int cmd_tune(const TuneArgs& a, const Settings& s, std::ostream& out)
{
    const auto train = load_data(a.dataset);
    json doc;
    std::ostringstream text;
    if (a.kind == "cart") {
        const auto t = tune_cart(train.data, cart_grid(s), s.seed);
        json entries = json::array();
        for (const auto& e : t.entries) {
            entries.push_back({{"params", cart_json(e.params)},
                               {"validation_accuracy", e.validation_accuracy},
                               {"leaf_count", e.leaf_count}});
            text << criterion_keyword(e.params.criterion) << " depth " << e.params.max_depth << ": "
                 << e.validation_accuracy << " (" << e.leaf_count << " leaves)\n";
        }
        doc = {{"kind", "cart"}, {"best", cart_json(t.best)}, {"validation_accuracy", t.best_accuracy},
               {"entries", entries}};
    } else if (a.kind == "rf") {
        const auto t = tune_rf(train.data, rf_grid(s), s.seed, s.jobs);
        json entries = json::array();
        for (const auto& e : t.entries) {
            entries.push_back({{"params", rf_json(e.params)},
                               {"validation_accuracy", e.validation_accuracy},
                               {"leaf_count", e.leaf_count}});
            text << criterion_keyword(e.params.cart.criterion) << " depth " << e.params.cart.max_depth << " trees "
                 << e.params.n_trees << ": " << e.validation_accuracy << " (" << e.leaf_count << " leaves)\n";
        }
        doc = {{"kind", "rf"}, {"best", rf_json(t.best)}, {"validation_accuracy", t.best_accuracy},
               {"entries", entries}};
    } else {
        throw ConfigError("tune: --kind must be cart or rf");
    }
    if (!a.out.empty())
        write_text_file(a.out, doc.dump(2) + '\n');
    out << text.str() << "best: " << doc["best"].dump() << '\n';
    return kOk;
}

// ---------------------------------------------------------------- preprocess

struct PreprocessArgs {
    std::string csv;
    std::string test_csv;
    std::string schema;
    double test_fraction = 0.2;
    std::string missing = "drop-rows";
    std::string unknown = "fail";
    std::string out;
};

int cmd_preprocess(const PreprocessArgs& a, const Settings& s, std::ostream& out)
{
    LoadOptions opts;
    if (a.missing == "drop-columns")
        opts.missing = LoadOptions::MissingPolicy::DropColumns;
    else if (a.missing != "drop-rows")
        throw ConfigError("--missing must be drop-rows or drop-columns");
    if (a.unknown == "reject-row")
        opts.unknown_category = LoadOptions::UnknownCategoryPolicy::RejectRow;
    else if (a.unknown != "fail")
        throw ConfigError("--unknown-category must be fail or reject-row");

    auto spec = SchemaSpec::load(a.schema);
    const auto all = load_csv(a.csv, spec, opts);
    LabeledDataset train, test;
    if (!a.test_csv.empty()) {
        // the test file uses the category lists found in the training file
        for (auto& col : spec.columns) {
            if (col.kind == SchemaSpec::Kind::Label)
                col.categories = all.schema.label_values;
            else if (col.kind == SchemaSpec::Kind::Categorical)
                if (auto g = all.schema.find_group(col.name))
                    col.categories = all.schema.categorical_groups[*g].categories;
        }
        train = all;
        test = load_csv(a.test_csv, spec, opts);
        if (test.schema.fingerprint() != train.schema.fingerprint())
            throw DataError("training and test files encode to different schemas");
    } else {
        std::tie(train, test) = split(all, a.test_fraction, s.seed);
    }
    const auto st = standardize(train, {test});
    save_dataset(fs::path(a.out) / "train.json", st.train, st.stats);
    save_dataset(fs::path(a.out) / "test.json", st.others.front(), st.stats);
    out << "features " << st.train.schema.dimension() << ", training samples " << st.train.size()
        << ", test samples " << st.others.front().size() << '\n';
    return kOk;
}

// ---------------------------------------------------------------- generate-synthetic

struct SyntheticArgs {
    std::size_t samples = 2000;
    double test_fraction = 0.2;
    std::string out;
};

int cmd_synthetic(const SyntheticArgs& a, const Settings& s, std::ostream& out)
{
    SyntheticConfig cfg;
    cfg.samples = a.samples;
    cfg.seed = s.seed;
    const auto [train, test] = split(generate_synthetic(cfg), a.test_fraction, s.seed);
    const auto st = standardize(train, {test});
    save_dataset(fs::path(a.out) / "train.json", st.train, st.stats);
    save_dataset(fs::path(a.out) / "test.json", st.others.front(), st.stats);
    out << "features " << st.train.schema.dimension() << ", training samples " << st.train.size()
        << ", test samples " << st.others.front().size() << '\n';
    return kOk;
}

void add_common(CLI::App* cmd, Settings& s)
{
    cmd->add_option("--config", "JSON file with defaults (flags take precedence)");
    cmd->add_option("--seed", s.seed, "Master random seed");
    cmd->add_option("--jobs", s.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--timing", s.timing, "Include wall-clock timings in outputs");
}

void add_timeout(CLI::App* cmd, Settings& s)
{
    cmd->add_option("--timeout-ms", s.timeout_ms, "Per-sample verification budget in milliseconds");
}

void add_grid(CLI::App* cmd, Settings& s)
{
    cmd->add_option("--grid-depths", s.grid_depths, "Depths to try when tuning")->delimiter(',');
    cmd->add_option("--grid-trees", s.grid_trees, "Forest sizes to try when tuning")->delimiter(',');
}

void add_trainer_options(CLI::App* cmd, Settings& s, std::string& criterion, std::string& mutation)
{
    cmd->add_option("--criterion", criterion, "gini or entropy");
    cmd->add_option("--max-depth", s.cart.max_depth, "CART / RF maximum depth");
    cmd->add_option("--min-samples-leaf", s.cart.min_samples_leaf, "CART / RF minimum samples per leaf");
    cmd->add_option("--n-trees", s.rf.n_trees, "Random forest size");
    cmd->add_option("--alpha", s.ga.alpha, "FATT accuracy weight");
    cmd->add_option("--beta", s.ga.beta, "FATT fairness weight");
    cmd->add_option("--population", s.ga.population_size, "FATT population size");
    cmd->add_option("--iterations", s.ga.iterations, "FATT generations");
    cmd->add_option("--mutation", mutation, "FATT mutation: grow or grow-prune");
    cmd->add_option("--crossover-prob", s.ga.crossover_probability, "FATT crossover probability");
    cmd->add_option("--mutation-prob", s.ga.mutation_probability, "FATT mutation probability");
    cmd->add_option("--elitism", s.ga.elitism, "FATT individuals carried over unchanged");
    cmd->add_option("--depth-cap", s.ga.max_depth_cap, "FATT maximum tree depth");
    cmd->add_option("--min-leaf", s.ga.min_leaf_size, "FATT minimum samples on each side of a grown split");
    cmd->add_option("--fairness-samples", s.fairness_samples,
                    "FATT fairness subsample size (0: whole training set)");
    add_grid(cmd, s);
}

void apply_trainer_strings(Settings& s, const std::string& criterion, const std::string& mutation)
{
    if (!criterion.empty())
        s.cart.criterion = parse_criterion(criterion);
    if (!mutation.empty())
        s.ga.mutation = parse_mutation(mutation);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    try {
        Settings s = initial_settings(args);
        std::string criterion, mutation;

        CLI::App app{"Fairness verification and fairness-aware training of decision trees and forests",
                     "fairtree"};
        app.require_subcommand(1);

        TrainArgs ta;
        auto* train = app.add_subcommand("train", "Train a cart, rf, fatt or hinted-cart model");
        add_common(train, s);
        train->add_option("--kind", ta.kind, "cart, rf, fatt or hinted-cart")
            ->required()
            ->check(CLI::IsMember(kModelKinds));
        train->add_option("--dataset", ta.dataset, "Training set (dataset JSON)")->required()->check(CLI::ExistingFile);
        train->add_option("--similarity", ta.similarity, "Similarity spec (fatt)")->check(CLI::ExistingFile);
        train->add_option("--hint-model", ta.hint_model, "FATT model giving the hints (hinted-cart)")
            ->check(CLI::ExistingFile);
        train->add_option("--out", ta.out, "Model file to write")->required();
        train->add_option("--log", ta.log, "Training log file (default: next to the model)");
        train->add_flag("--tune", s.tune, "Pick cart / rf hyper-parameters on a validation split");
        add_trainer_options(train, s, criterion, mutation);

        VerifyArgs va;
        auto* verify = app.add_subcommand("verify", "Verify per-sample fairness of a model");
        add_common(verify, s);
        add_timeout(verify, s);
        verify->add_option("--model", va.model, "Model file")->required()->check(CLI::ExistingFile);
        verify->add_option("--dataset", va.dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);
        verify->add_option("--similarity", va.similarity, "Similarity spec")->required()->check(CLI::ExistingFile);
        verify->add_option("--out", va.out, "Directory for verdicts.csv and aggregate.json");

        EvaluateArgs ea;
        auto* eval = app.add_subcommand("evaluate", "Accuracy, balanced accuracy and fairness of models");
        add_common(eval, s);
        add_timeout(eval, s);
        eval->add_option("--model", ea.models, "Model file (repeatable)")->required()->check(CLI::ExistingFile);
        eval->add_option("--dataset", ea.dataset, "Test set (dataset JSON)")->required()->check(CLI::ExistingFile);
        eval->add_option("--similarity", ea.similarities, "Similarity spec (repeatable)")->check(CLI::ExistingFile);
        eval->add_option("--out", ea.out, "Report JSON file");

        BenchmarkArgs ba;
        auto* bench = app.add_subcommand("benchmark", "Train and compare rf, cart, fatt and hinted-cart");
        add_common(bench, s);
        add_timeout(bench, s);
        bench->add_option("--dataset", ba.dataset, "Training set")->required()->check(CLI::ExistingFile);
        bench->add_option("--test", ba.test, "Test set")->required()->check(CLI::ExistingFile);
        bench->add_option("--similarity", ba.similarities, "Similarity spec (repeatable; fatt trains on the first)")
            ->check(CLI::ExistingFile);
        bench->add_option("--models", ba.models, "Rows of the table")->delimiter(',');
        bench->add_option("--out", ba.out, "Output directory");
        add_trainer_options(bench, s, criterion, mutation);

        TuneArgs tu;
        auto* tune = app.add_subcommand("tune", "Grid search of cart / rf hyper-parameters");
        add_common(tune, s);
        tune->add_option("--kind", tu.kind, "cart or rf")->required()->check(CLI::IsMember({"cart", "rf"}));
        tune->add_option("--dataset", tu.dataset, "Training set")->required()->check(CLI::ExistingFile);
        tune->add_option("--out", tu.out, "Result JSON file");
        add_grid(tune, s);

        PreprocessArgs pa;
        auto* prep = app.add_subcommand("preprocess", "Encode and standardize a CSV dataset");
        add_common(prep, s);
        prep->add_option("--csv,--dataset", pa.csv, "CSV file")->required()->check(CLI::ExistingFile);
        prep->add_option("--test-csv", pa.test_csv, "Separate test CSV file")->check(CLI::ExistingFile);
        prep->add_option("--schema", pa.schema, "Column description JSON")->required()->check(CLI::ExistingFile);
        prep->add_option("--test-fraction", pa.test_fraction, "Held-out share when there is no test file")
            ->check(CLI::Range(0.0, 1.0));
        prep->add_option("--missing", pa.missing, "drop-rows or drop-columns");
        prep->add_option("--unknown-category", pa.unknown, "fail or reject-row");
        prep->add_option("--out", pa.out, "Output directory")->required();

        SyntheticArgs sa;
        auto* synth = app.add_subcommand("generate-synthetic", "Write the synthetic biased dataset");
        add_common(synth, s);
        synth->add_option("--samples", sa.samples, "Number of individuals")->check(CLI::PositiveNumber);
        synth->add_option("--test-fraction", sa.test_fraction, "Held-out share")->check(CLI::Range(0.0, 1.0));
        synth->add_option("--out", sa.out, "Output directory")->required();

        try {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? kOk : kUsage;
        }
        apply_trainer_strings(s, criterion, mutation);

        if (train->parsed())
            return cmd_train(ta, s, out);
        if (verify->parsed())
            return cmd_verify(va, s, out);
        if (eval->parsed())
            return cmd_evaluate(ea, s, out);
        if (bench->parsed())
            return cmd_benchmark(ba, s, out);
        if (tune->parsed())
            return cmd_tune(tu, s, out);
        if (prep->parsed())
            return cmd_preprocess(pa, s, out);
        if (synth->parsed())
            return cmd_synthetic(sa, s, out);
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

} // namespace fairtree::cli
