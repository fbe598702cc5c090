#include "fairtree/schema.hpp"

#include <cstdio>

#include "fairtree/error.hpp"

namespace fairtree {

std::size_t FeatureSchema::dimension() const
{
    std::size_t d = numeric_features.size();
    for (const auto& g : categorical_groups)
        d += g.columns.size();
    return d;
}

void FeatureSchema::validate() const
{
    const std::size_t d = dimension();
    std::vector<int> seen(d, 0);
    auto mark = [&](std::size_t column, const std::string& owner) {
        if (column >= d)
            throw DataError("schema: column " + std::to_string(column) + " of '" + owner + "' is out of range");
        if (seen[column]++)
            throw DataError("schema: column " + std::to_string(column) + " is assigned twice");
    };
    for (const auto& f : numeric_features)
        mark(f.column, f.name);
    for (const auto& g : categorical_groups) {
        if (g.categories.size() < 2)
            throw DataError("schema: categorical group '" + g.name + "' needs at least two categories");
        if (g.categories.size() != g.columns.size())
            throw DataError("schema: categorical group '" + g.name + "' has mismatched columns");
        for (auto c : g.columns)
            mark(c, g.name);
    }
    if (label_values.empty())
        throw DataError("schema: no label values");
    if (positive_label && *positive_label >= label_values.size())
        throw DataError("schema: positive label out of range");
}

std::optional<std::size_t> FeatureSchema::find_numeric(const std::string& name) const
{
    for (std::size_t i = 0; i < numeric_features.size(); ++i)
        if (numeric_features[i].name == name)
            return i;
    return std::nullopt;
}

std::optional<std::size_t> FeatureSchema::find_group(const std::string& name) const
{
    for (std::size_t i = 0; i < categorical_groups.size(); ++i)
        if (categorical_groups[i].name == name)
            return i;
    return std::nullopt;
}

std::string FeatureSchema::fingerprint() const
{
    const std::string text = to_json(*this).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void FeatureSchema::check_sample(const Sample& x) const
{
    if (x.size() != dimension())
        throw DataError("sample has " + std::to_string(x.size()) + " columns, schema expects " +
                        std::to_string(dimension()));
    for (const auto& g : categorical_groups) {
        int hot = 0;
        for (auto c : g.columns) {
            if (x[c] == 1.0)
                ++hot;
            else if (x[c] != 0.0)
                throw DataError("sample: one-hot column of '" + g.name + "' is not 0/1");
        }
        if (hot != 1)
            throw DataError("sample: group '" + g.name + "' must have exactly one hot column");
    }
}

nlohmann::json to_json(const FeatureSchema& schema)
{
    nlohmann::json numeric = nlohmann::json::array();
    for (const auto& f : schema.numeric_features)
        numeric.push_back({{"name", f.name}, {"column", f.column}});
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : schema.categorical_groups)
        groups.push_back({{"name", g.name}, {"categories", g.categories}, {"columns", g.columns}});
    nlohmann::json doc = {
        {"numeric_features", numeric},
        {"categorical_groups", groups},
        {"label_column", schema.label_column},
        {"label_values", schema.label_values},
    };
    if (schema.positive_label)
        doc["positive_label"] = *schema.positive_label;
    return doc;
}

FeatureSchema schema_from_json(const nlohmann::json& doc)
{
    try {
        FeatureSchema s;
        for (const auto& f : doc.at("numeric_features"))
            s.numeric_features.push_back({f.at("name").get<std::string>(), f.at("column").get<std::size_t>()});
        for (const auto& g : doc.at("categorical_groups"))
            s.categorical_groups.push_back({g.at("name").get<std::string>(),
                                            g.at("categories").get<std::vector<std::string>>(),
                                            g.at("columns").get<std::vector<std::size_t>>()});
        s.label_column = doc.at("label_column").get<std::string>();
        s.label_values = doc.at("label_values").get<std::vector<std::string>>();
        if (doc.contains("positive_label"))
            s.positive_label = doc.at("positive_label").get<std::size_t>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("schema document: ") + e.what());
    }
}

ColumnLayout::ColumnLayout(const FeatureSchema& schema)
{
    columns_.resize(schema.dimension());
    numeric_columns_.reserve(schema.numeric_features.size());
    for (std::size_t f = 0; f < schema.numeric_features.size(); ++f) {
        const auto c = schema.numeric_features[f].column;
        columns_.at(c) = {Kind::Numeric, f, 0, 0};
        numeric_columns_.push_back(c);
    }
    for (std::size_t g = 0; g < schema.categorical_groups.size(); ++g) {
        const auto& group = schema.categorical_groups[g];
        group_offset_.push_back(category_slots_);
        for (std::size_t k = 0; k < group.columns.size(); ++k)
            columns_.at(group.columns[k]) = {Kind::Categorical, g, k, category_slots_ + k};
        category_slots_ += group.columns.size();
        group_columns_.push_back(group.columns);
    }
}

std::shared_ptr<const ColumnLayout> ColumnLayout::all_numeric(std::size_t dimension)
{
    auto layout = std::shared_ptr<ColumnLayout>(new ColumnLayout());
    for (std::size_t j = 0; j < dimension; ++j) {
        layout->columns_.push_back({Kind::Numeric, j, 0, 0});
        layout->numeric_columns_.push_back(j);
    }
    return layout;
}

void LabeledDataset::validate() const
{
    if (samples.size() != labels.size())
        throw DataError("dataset: samples and labels differ in length");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        schema.check_sample(samples[i]);
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= schema.label_values.size())
            throw DataError("dataset: label index out of range at row " + std::to_string(i));
    }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const
{
    LabeledDataset out{schema, {}, {}};
    out.samples.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (auto i : indices) {
        out.samples.push_back(samples.at(i));
        out.labels.push_back(labels.at(i));
    }
    return out;
}

} // namespace fairtree
