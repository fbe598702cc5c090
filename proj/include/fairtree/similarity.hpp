#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtree/abstract_domain.hpp"
#include "fairtree/dataset_io.hpp"
#include "fairtree/schema.hpp"

namespace fairtree {

/// Declarative similarity relation between individuals, by feature name.
///
/// JSON form:
///   {kind: "noise"|"cat"|"noise-cat"|"conditional-attribute", name?,
///    features?: [names], tau?, sensitive_groups?: [names],
///    conditional?: {attribute, tau, tau_space?: "encoded"|"raw",
///                   below: {features?, tau}, above: {features?, tau}}}
/// An omitted `features` list means every numeric feature.
struct SimilaritySpec {
    enum class Kind { Noise, Cat, NoiseCat, ConditionalAttribute };

    struct Noise {
        std::optional<std::vector<std::string>> features; // nullopt: all numeric
        double tau = 0.0;
    };

    struct Conditional {
        std::string attribute;
        double tau = 0.0;
        bool tau_is_raw = false; // threshold given in unstandardized units
        Noise below;
        Noise above;
    };

    Kind kind = Kind::Noise;
    std::string name;
    Noise noise;
    std::vector<std::string> sensitive_groups;
    Conditional conditional;

    static SimilaritySpec from_json(const nlohmann::json& doc);
    static SimilaritySpec load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    /// `name` if set, otherwise the kind keyword.
    std::string label() const;
};

const char* kind_keyword(SimilaritySpec::Kind kind);

/// SimilaritySpec bound to a schema: feature names resolved to indexes and
/// thresholds expressed in the encoded (standardized) space.
struct Similarity {
    struct Noise {
        std::vector<std::size_t> features; // numeric feature indexes
        double tau = 0.0;
    };

    SimilaritySpec::Kind kind = SimilaritySpec::Kind::Noise;
    Noise noise;
    std::vector<std::size_t> sensitive_groups;
    std::size_t attribute = 0; // numeric feature index
    double attribute_tau = 0.0;
    Noise below;
    Noise above;
};

/// Throws DataError for unknown names, ConfigError for negative thresholds or
/// a raw threshold without standardization statistics.
Similarity resolve(const SimilaritySpec& spec, const FeatureSchema& schema,
                   const StandardizationStats* stats = nullptr);

/// Abstract values whose concretizations together are exactly the set of
/// samples similar to x.
std::vector<ReducedAbstractValue> from_similarity(std::span<const double> x, const Similarity& similarity,
                                                  const std::shared_ptr<const ColumnLayout>& layout);

} // namespace fairtree
