#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fairtree {

/// One encoded input vector: standardized numerics and 0/1 one-hot columns.
using Sample = std::vector<double>;

struct NumericFeature {
    std::string name;
    std::size_t column = 0;

    bool operator==(const NumericFeature&) const = default;
};

/// A categorical feature replaced by one binary column per category.
struct CategoricalGroup {
    std::string name;
    std::vector<std::string> categories;
    std::vector<std::size_t> columns; // columns[c] encodes categories[c]

    bool operator==(const CategoricalGroup&) const = default;
};

/// Metadata tying encoded columns back to the original features.
struct FeatureSchema {
    std::vector<NumericFeature> numeric_features;
    std::vector<CategoricalGroup> categorical_groups;
    std::string label_column;
    std::vector<std::string> label_values;
    std::optional<std::size_t> positive_label;

    /// Number of encoded columns.
    std::size_t dimension() const;

    /// Throws DataError unless the columns partition [0, dimension()) and
    /// every group has at least two categories.
    void validate() const;

    std::optional<std::size_t> find_numeric(const std::string& name) const;
    std::optional<std::size_t> find_group(const std::string& name) const;

    /// Stable 64-bit FNV-1a hash of the structural part of the schema, in hex.
    std::string fingerprint() const;

    /// Throws DataError when x has the wrong width or breaks a one-hot group.
    void check_sample(const Sample& x) const;

    bool operator==(const FeatureSchema&) const = default;
};

nlohmann::json to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& doc);

/// Column-level view used by the abstract domain: what each encoded column is.
class ColumnLayout {
public:
    enum class Kind : std::uint8_t { Numeric, Categorical };

    struct Column {
        Kind kind = Kind::Numeric;
        std::size_t index = 0;    // numeric feature index, or group index
        std::size_t category = 0; // category within the group
        std::size_t slot = 0;     // flat index over all categories of all groups
    };

    explicit ColumnLayout(const FeatureSchema& schema);

    /// Every column treated as an unconstrained real (no one-hot reduction).
    static std::shared_ptr<const ColumnLayout> all_numeric(std::size_t dimension);

    std::size_t dimension() const { return columns_.size(); }
    std::size_t numeric_count() const { return numeric_columns_.size(); }
    std::size_t group_count() const { return group_columns_.size(); }
    const Column& column(std::size_t j) const { return columns_.at(j); }
    std::size_t numeric_column(std::size_t f) const { return numeric_columns_[f]; }
    const std::vector<std::size_t>& group_columns(std::size_t g) const { return group_columns_[g]; }
    std::size_t group_size(std::size_t g) const { return group_columns_[g].size(); }
    std::size_t group_offset(std::size_t g) const { return group_offset_[g]; }
    std::size_t category_slots() const { return category_slots_; }

private:
    ColumnLayout() = default;

    std::vector<Column> columns_;
    std::vector<std::size_t> numeric_columns_;
    std::vector<std::vector<std::size_t>> group_columns_;
    std::vector<std::size_t> group_offset_;
    std::size_t category_slots_ = 0;
};

/// Encoded samples with one label index each.
struct LabeledDataset {
    FeatureSchema schema;
    std::vector<Sample> samples;
    std::vector<int> labels;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::size_t label_count() const { return schema.label_values.size(); }

    /// Checks sizes, label range and the one-hot invariant of every sample.
    void validate() const;

    LabeledDataset subset(const std::vector<std::size_t>& indices) const;
};

} // namespace fairtree
