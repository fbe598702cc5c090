#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fairtree/tree.hpp"

namespace fairtree {

inline constexpr int kModelFormatVersion = 1;

/// A model plus the fingerprint of the schema it was trained on.
struct ModelDocument {
    Model model;
    std::string schema_fingerprint;
};

/// Model interchange format:
///   {format: "fairtree-model", version, schema_fingerprint, kind: "tree"|"forest",
///    num_features, num_labels, voting, trees: [node]}
/// where node is {split: {feature, threshold}, left, right} or
/// {leaf: {counts, distribution}}. `left` is taken when the split test
/// fails and `right` when it holds. Thresholds round-trip exactly.
nlohmann::json serialize(const ModelDocument& doc);
ModelDocument deserialize(const nlohmann::json& doc);

std::string serialize_text(const ModelDocument& doc);
ModelDocument deserialize_text(const std::string& text);

void save_model(const std::filesystem::path& path, const ModelDocument& doc);
ModelDocument load_model(const std::filesystem::path& path);

} // namespace fairtree
