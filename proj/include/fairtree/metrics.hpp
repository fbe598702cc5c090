#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtree/schema.hpp"
#include "fairtree/similarity.hpp"
#include "fairtree/tree.hpp"
#include "fairtree/verifier.hpp"

namespace fairtree {

/// Share of samples whose output is exactly {label}. Multi-label outputs
/// are errors.
template <typename Classifier>
double accuracy(const Classifier& c, const LabeledDataset& data)
{
    if (data.empty())
        return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto out = c.predict(data.samples[i]);
        hit += out.is_singleton() && out.front() == data.labels[i];
    }
    return static_cast<double>(hit) / static_cast<double>(data.size());
}

double accuracy(const Model& model, const LabeledDataset& data);

struct BinaryCounts {
    std::size_t true_positive = 0;
    std::size_t false_negative = 0;
    std::size_t true_negative = 0;
    std::size_t false_positive = 0;
};

/// 0.5 (TP / (TP + FN) + TN / (TN + FP)). A class absent from the data
/// contributes nothing and the mean is taken over the classes present.
double balanced_accuracy(const BinaryCounts& counts);

/// Positive class is the schema's positive label, or label 1 when none is
/// designated. Multi-label outputs count as wrong for either class.
/// Throws ConfigError unless the task has exactly two labels.
BinaryCounts binary_counts(const Model& model, const LabeledDataset& data);
double balanced_accuracy(const Model& model, const LabeledDataset& data);

struct FairnessEntry {
    std::string similarity;
    double ratio = 0.0;
    std::size_t stable = 0;
    std::size_t unstable = 0;
    std::size_t unknown = 0;
    double mean_time_ms = 0.0;
};

struct EvaluationReport {
    std::string model;
    double accuracy = 0.0;
    std::optional<double> balanced_accuracy; // binary tasks only
    std::vector<FairnessEntry> fairness;
    std::size_t leaf_count = 0;
    double mean_time_ms = 0.0;
};

struct NamedSimilarity {
    std::string name;
    Similarity similarity;
};

EvaluationReport evaluate(const std::string& model_id, const Model& model, const LabeledDataset& test,
                          const std::vector<NamedSimilarity>& similarities, const AnalysisConfig& cfg,
                          std::size_t jobs = 1);

/// Timing fields are written only when `timing` is set, so default reports
/// are reproducible byte for byte.
nlohmann::json report_to_json(const EvaluationReport& report, bool timing = false);
EvaluationReport report_from_json(const nlohmann::json& doc);

/// Aligned text table: Model, Acc %, Bal.Acc %, one fairness column per
/// similarity, Leaves (and verification ms per similarity when `timing`).
std::string render_table(const std::vector<EvaluationReport>& reports, bool timing = false);

} // namespace fairtree
