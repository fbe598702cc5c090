#include "fairtree/similarity.hpp"

#include "fairtree/error.hpp"

namespace fairtree {

namespace {

SimilaritySpec::Noise noise_from_json(const nlohmann::json& j)
{
    SimilaritySpec::Noise n;
    if (j.contains("features"))
        n.features = j.at("features").get<std::vector<std::string>>();
    n.tau = j.value("tau", 0.0);
    return n;
}

nlohmann::json noise_to_json(const SimilaritySpec::Noise& n)
{
    nlohmann::json j = {{"tau", n.tau}};
    if (n.features)
        j["features"] = *n.features;
    return j;
}

Similarity::Noise resolve_noise(const SimilaritySpec::Noise& n, const FeatureSchema& schema)
{
    if (!(n.tau >= 0.0) || !std::isfinite(n.tau))
        throw ConfigError("similarity: noise threshold must be a finite value >= 0");
    Similarity::Noise out;
    out.tau = n.tau;
    if (!n.features) {
        for (std::size_t f = 0; f < schema.numeric_features.size(); ++f)
            out.features.push_back(f);
        return out;
    }
    for (const auto& name : *n.features) {
        const auto f = schema.find_numeric(name);
        if (!f)
            throw DataError("similarity: '" + name + "' is not a numeric feature");
        out.features.push_back(*f);
    }
    return out;
}

ReducedAbstractValue noise_value(std::span<const double> x, const Similarity::Noise& noise,
                                 const std::shared_ptr<const ColumnLayout>& layout)
{
    auto v = ReducedAbstractValue::point(layout, x);
    for (auto f : noise.features) {
        const double c = x[layout->numeric_column(f)];
        v.set_interval(f, Interval::closed(c - noise.tau, c + noise.tau));
    }
    return v;
}

ReducedAbstractValue cat_value(std::span<const double> x, const std::vector<std::size_t>& groups,
                               const std::shared_ptr<const ColumnLayout>& layout)
{
    auto v = ReducedAbstractValue::point(layout, x);
    for (auto g : groups)
        v.admit_all(g);
    return v;
}

} // namespace

const char* kind_keyword(SimilaritySpec::Kind kind)
{
    switch (kind) {
    case SimilaritySpec::Kind::Noise:
        return "noise";
    case SimilaritySpec::Kind::Cat:
        return "cat";
    case SimilaritySpec::Kind::NoiseCat:
        return "noise-cat";
    case SimilaritySpec::Kind::ConditionalAttribute:
        return "conditional-attribute";
    }
    return "?";
}

SimilaritySpec SimilaritySpec::from_json(const nlohmann::json& doc)
{
    try {
        SimilaritySpec s;
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "noise")
            s.kind = Kind::Noise;
        else if (kind == "cat")
            s.kind = Kind::Cat;
        else if (kind == "noise-cat")
            s.kind = Kind::NoiseCat;
        else if (kind == "conditional-attribute")
            s.kind = Kind::ConditionalAttribute;
        else
            throw ConfigError("similarity: unknown kind '" + kind + "'");
        s.name = doc.value("name", "");
        s.noise = noise_from_json(doc);
        if (doc.contains("sensitive_groups"))
            s.sensitive_groups = doc.at("sensitive_groups").get<std::vector<std::string>>();
        if (s.kind == Kind::ConditionalAttribute) {
            const auto& c = doc.at("conditional");
            s.conditional.attribute = c.at("attribute").get<std::string>();
            s.conditional.tau = c.at("tau").get<double>();
            const auto space = c.value("tau_space", "encoded");
            if (space != "encoded" && space != "raw")
                throw ConfigError("similarity: tau_space must be 'encoded' or 'raw'");
            s.conditional.tau_is_raw = space == "raw";
            s.conditional.below = noise_from_json(c.at("below"));
            s.conditional.above = noise_from_json(c.at("above"));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("similarity document: ") + e.what());
    }
}

SimilaritySpec SimilaritySpec::load(const std::filesystem::path& path)
{
    return from_json(read_json_file(path));
}

nlohmann::json SimilaritySpec::to_json() const
{
    nlohmann::json j = noise_to_json(noise);
    j["kind"] = kind_keyword(kind);
    if (!name.empty())
        j["name"] = name;
    j["sensitive_groups"] = sensitive_groups;
    if (kind == Kind::ConditionalAttribute)
        j["conditional"] = {
            {"attribute", conditional.attribute},
            {"tau", conditional.tau},
            {"tau_space", conditional.tau_is_raw ? "raw" : "encoded"},
            {"below", noise_to_json(conditional.below)},
            {"above", noise_to_json(conditional.above)},
        };
    return j;
}

std::string SimilaritySpec::label() const
{
    return name.empty() ? kind_keyword(kind) : name;
}

Similarity resolve(const SimilaritySpec& spec, const FeatureSchema& schema, const StandardizationStats* stats)
{
    Similarity out;
    out.kind = spec.kind;
    using Kind = SimilaritySpec::Kind;
    if (spec.kind == Kind::Noise || spec.kind == Kind::NoiseCat)
        out.noise = resolve_noise(spec.noise, schema);
    if (spec.kind == Kind::Cat || spec.kind == Kind::NoiseCat) {
        for (const auto& name : spec.sensitive_groups) {
            const auto g = schema.find_group(name);
            if (!g)
                throw DataError("similarity: '" + name + "' is not a categorical feature");
            out.sensitive_groups.push_back(*g);
        }
    }
    if (spec.kind == Kind::ConditionalAttribute) {
        const auto& c = spec.conditional;
        const auto f = schema.find_numeric(c.attribute);
        if (!f)
            throw DataError("similarity: '" + c.attribute + "' is not a numeric feature");
        if (!std::isfinite(c.tau))
            throw ConfigError("similarity: conditional threshold must be finite");
        out.attribute = *f;
        out.attribute_tau = c.tau;
        if (c.tau_is_raw) {
            if (!stats)
                throw ConfigError("similarity: a raw conditional threshold needs standardization statistics");
            out.attribute_tau = stats->to_standardized(*f, c.tau);
        }
        out.below = resolve_noise(c.below, schema);
        out.above = resolve_noise(c.above, schema);
    }
    return out;
}

std::vector<ReducedAbstractValue> from_similarity(std::span<const double> x, const Similarity& similarity,
                                                  const std::shared_ptr<const ColumnLayout>& layout)
{
    using Kind = SimilaritySpec::Kind;
    std::vector<ReducedAbstractValue> out;
    switch (similarity.kind) {
    case Kind::Noise:
        out.push_back(noise_value(x, similarity.noise, layout));
        break;
    case Kind::Cat:
        out.push_back(cat_value(x, similarity.sensitive_groups, layout));
        break;
    case Kind::NoiseCat:
        out.push_back(noise_value(x, similarity.noise, layout));
        out.push_back(cat_value(x, similarity.sensitive_groups, layout));
        break;
    case Kind::ConditionalAttribute: {
        const std::size_t column = layout->numeric_column(similarity.attribute);
        const double tau = similarity.attribute_tau;
        Constraint guard{column, Constraint::Op::Le, tau};
        ReducedAbstractValue v = ReducedAbstractValue::bottom(layout);
        if (x[column] <= tau) {
            v = noise_value(x, similarity.below, layout);
        } else {
            v = noise_value(x, similarity.above, layout);
            guard.op = Constraint::Op::Gt;
        }
        if (v.refine(guard))
            out.push_back(std::move(v));
        break;
    }
    }
    return out;
}

} // namespace fairtree
