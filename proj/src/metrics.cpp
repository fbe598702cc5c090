#include "fairtree/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "fairtree/error.hpp"

namespace fairtree {

double accuracy(const Model& model, const LabeledDataset& data)
{
    return std::visit([&](const auto& c) { return accuracy(c, data); }, model);
}

double balanced_accuracy(const BinaryCounts& c)
{
    double sum = 0.0;
    int classes = 0;
    if (c.true_positive + c.false_negative > 0) {
        sum += static_cast<double>(c.true_positive) / static_cast<double>(c.true_positive + c.false_negative);
        ++classes;
    }
    if (c.true_negative + c.false_positive > 0) {
        sum += static_cast<double>(c.true_negative) / static_cast<double>(c.true_negative + c.false_positive);
        ++classes;
    }
    return classes ? sum / classes : 0.0;
}

BinaryCounts binary_counts(const Model& model, const LabeledDataset& data)
{
    if (data.label_count() != 2)
        throw ConfigError("balanced accuracy needs a binary task");
    const int positive = static_cast<int>(data.schema.positive_label.value_or(1));
    BinaryCounts c;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto out = predict(model, data.samples[i]);
        const bool correct = out.is_singleton() && out.front() == data.labels[i];
        if (data.labels[i] == positive)
            ++(correct ? c.true_positive : c.false_negative);
        else
            ++(correct ? c.true_negative : c.false_positive);
    }
    return c;
}

double balanced_accuracy(const Model& model, const LabeledDataset& data)
{
    return balanced_accuracy(binary_counts(model, data));
}

EvaluationReport evaluate(const std::string& model_id, const Model& model, const LabeledDataset& test,
                          const std::vector<NamedSimilarity>& similarities, const AnalysisConfig& cfg,
                          std::size_t jobs)
{
    EvaluationReport r;
    r.model = model_id;
    r.accuracy = accuracy(model, test);
    if (test.label_count() == 2)
        r.balanced_accuracy = balanced_accuracy(model, test);
    r.leaf_count = leaf_count(model);
    const Forest forest = as_forest(model);
    double total_ms = 0.0;
    for (const auto& s : similarities) {
        const auto f = fairness_metric(forest, test, s.similarity, cfg, jobs);
        r.fairness.push_back({s.name, f.ratio, f.stable, f.unstable, f.unknown, f.mean_time_ms});
        total_ms += f.mean_time_ms;
    }
    if (!similarities.empty())
        r.mean_time_ms = total_ms / static_cast<double>(similarities.size());
    return r;
}

nlohmann::json report_to_json(const EvaluationReport& report, bool timing)
{
    nlohmann::json fairness = nlohmann::json::array();
    for (const auto& f : report.fairness) {
        nlohmann::json e = {
            {"similarity", f.similarity},
            {"fairness", f.ratio},
            {"stable", f.stable},
            {"unstable", f.unstable},
            {"unknown", f.unknown},
        };
        if (timing)
            e["mean_time_ms"] = f.mean_time_ms;
        fairness.push_back(std::move(e));
    }
    nlohmann::json doc = {
        {"model", report.model},
        {"accuracy", report.accuracy},
        {"balanced_accuracy", report.balanced_accuracy ? nlohmann::json(*report.balanced_accuracy) : nlohmann::json()},
        {"fairness", fairness},
        {"leaf_count", report.leaf_count},
    };
    if (timing)
        doc["mean_time_ms"] = report.mean_time_ms;
    return doc;
}

EvaluationReport report_from_json(const nlohmann::json& doc)
{
    try {
        EvaluationReport r;
        r.model = doc.at("model").get<std::string>();
        r.accuracy = doc.at("accuracy").get<double>();
        if (!doc.at("balanced_accuracy").is_null())
            r.balanced_accuracy = doc.at("balanced_accuracy").get<double>();
        for (const auto& e : doc.at("fairness"))
            r.fairness.push_back({e.at("similarity").get<std::string>(), e.at("fairness").get<double>(),
                                  e.at("stable").get<std::size_t>(), e.at("unstable").get<std::size_t>(),
                                  e.at("unknown").get<std::size_t>(), e.value("mean_time_ms", 0.0)});
        r.leaf_count = doc.at("leaf_count").get<std::size_t>();
        r.mean_time_ms = doc.value("mean_time_ms", 0.0);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report document: ") + e.what());
    }
}

namespace {

std::string percent(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return buf;
}

} // namespace

std::string render_table(const std::vector<EvaluationReport>& reports, bool timing)
{
    std::vector<std::string> header{"Model", "Acc %", "Bal.Acc %"};
    if (!reports.empty())
        for (const auto& f : reports.front().fairness)
            header.push_back("Fair " + f.similarity + " %");
    header.push_back("Leaves");
    if (timing && !reports.empty())
        for (const auto& f : reports.front().fairness)
            header.push_back("ms " + f.similarity);

    std::vector<std::vector<std::string>> rows{header};
    for (const auto& r : reports) {
        std::vector<std::string> row{r.model, percent(r.accuracy),
                                     r.balanced_accuracy ? percent(*r.balanced_accuracy) : "-"};
        for (const auto& f : r.fairness)
            row.push_back(percent(f.ratio));
        row.push_back(std::to_string(r.leaf_count));
        if (timing)
            for (const auto& f : r.fairness) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.3f", f.mean_time_ms);
                row.push_back(buf);
            }
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
            width[c] = std::max(width[c], row[c].size());

    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            const auto& cell = rows[r][c];
            const std::string pad(width[c] - cell.size(), ' ');
            if (c)
                out << "  ";
            out << (c == 0 ? cell + pad : pad + cell);
        }
        out << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : width)
                total += w;
            out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
        }
    }
    return out.str();
}

} // namespace fairtree
