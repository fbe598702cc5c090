#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairtree/schema.hpp"

namespace fairtree {

/// Declarative description of a CSV file: what every column is.
struct SchemaSpec {
    enum class Kind { Numeric, Categorical, Label, Ignore };

    struct Column {
        std::string name;
        Kind kind = Kind::Numeric;
        std::vector<std::string> categories;           // declared order; empty = sorted distinct values
        std::map<std::string, std::string> aliases;    // raw cell text -> canonical category
    };

    std::vector<Column> columns;
    std::optional<std::string> positive_label;
    bool has_header = true;

    static SchemaSpec from_json(const nlohmann::json& doc);
    static SchemaSpec load(const std::filesystem::path& path);
};

struct LoadOptions {
    enum class MissingPolicy { DropRows, DropColumns };
    enum class UnknownCategoryPolicy { RejectRow, Fail };

    MissingPolicy missing = MissingPolicy::DropRows;
    UnknownCategoryPolicy unknown_category = UnknownCategoryPolicy::Fail;
    std::vector<std::string> missing_tokens = {"", "?", "NA"};
};

/// Per numeric feature mean and population standard deviation, fitted on a
/// training split.
struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant; // stddev == 0: the feature maps to 0

    /// Inverse transform of one standardized value of numeric feature f.
    double to_raw(std::size_t f, double standardized) const;
    /// Forward transform of one raw value of numeric feature f.
    double to_standardized(std::size_t f, double raw) const;
};

/// Parses a CSV document held in memory.
LabeledDataset parse_csv(const std::string& text, const SchemaSpec& spec, const LoadOptions& options = {});

LabeledDataset load_csv(const std::filesystem::path& path, const SchemaSpec& spec, const LoadOptions& options = {});

StandardizationStats fit_standardization(const LabeledDataset& train);
LabeledDataset apply_standardization(const LabeledDataset& data, const StandardizationStats& stats);

struct StandardizedSplit {
    LabeledDataset train;
    std::vector<LabeledDataset> others;
    StandardizationStats stats;
};

/// Fits on `train` and transforms train and every dataset in `others`.
StandardizedSplit standardize(const LabeledDataset& train, const std::vector<LabeledDataset>& others);

/// Seeded shuffle split. |test| = round-half-away-from-zero(test_fraction * n).
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double test_fraction, std::uint64_t seed);

/// Original-feature view of an encoded sample.
struct DecodedSample {
    std::vector<double> numeric;       // per numeric feature
    std::vector<std::size_t> category; // per categorical group
};

DecodedSample decode(const FeatureSchema& schema, const Sample& x);
Sample encode(const FeatureSchema& schema, const DecodedSample& record);

/// Dataset interchange document: schema, optional stats, encoded matrix.
nlohmann::json dataset_to_json(const LabeledDataset& data, const std::optional<StandardizationStats>& stats = std::nullopt);
LabeledDataset dataset_from_json(const nlohmann::json& doc, std::optional<StandardizationStats>* stats = nullptr);

void save_dataset(const std::filesystem::path& path, const LabeledDataset& data,
                  const std::optional<StandardizationStats>& stats = std::nullopt);
LabeledDataset load_dataset(const std::filesystem::path& path, std::optional<StandardizationStats>* stats = nullptr);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace fairtree
