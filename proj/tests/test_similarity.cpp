#include <doctest.h>

#include "fairtree/dataset_io.hpp"
#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"
#include "fairtree/similarity.hpp"
#include "oracle.hpp"

using namespace fairtree;

namespace {

// age (numeric, column 0), color = {white, black} on columns 1 and 2
FeatureSchema age_color_schema()
{
    FeatureSchema s;
    s.numeric_features = {{"age", 0}};
    s.categorical_groups = {{"color", {"white", "black"}, {1, 2}}};
    s.label_column = "y";
    s.label_values = {"l1", "l2"};
    s.validate();
    return s;
}

SimilaritySpec parse(const char* text) { return SimilaritySpec::from_json(nlohmann::json::parse(text)); }

} // namespace

TEST_CASE("cat similarity frees the sensitive group and fixes the rest")
{
    const auto schema = age_color_schema();
    const auto layout = std::make_shared<const ColumnLayout>(schema);
    const auto sim = resolve(parse(R"({"kind": "cat", "sensitive_groups": ["color"]})"), schema);
    const Sample x{0.5, 1, 0};
    const auto vs = from_similarity(x, sim, layout);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].admitted(0) == (std::vector<std::size_t>{0, 1}));
    CHECK(vs[0].interval(0) == Interval::point(0.5));
    CHECK(vs[0].onehot_assignments() == doctest::Approx(2.0));
}

TEST_CASE("zero noise compiles to the point itself")
{
    const auto schema = age_color_schema();
    const auto layout = std::make_shared<const ColumnLayout>(schema);
    const auto sim = resolve(parse(R"({"kind": "noise", "tau": 0})"), schema);
    const Sample x{0.5, 0, 1};
    const auto vs = from_similarity(x, sim, layout);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0] == ReducedAbstractValue::point(layout, x));
}

TEST_CASE("noise intervals are closed")
{
    const auto schema = age_color_schema();
    const auto layout = std::make_shared<const ColumnLayout>(schema);
    const auto sim = resolve(parse(R"({"kind": "noise", "features": ["age"], "tau": 0.25})"), schema);
    const auto vs = from_similarity(Sample{1, 1, 0}, sim, layout);
    CHECK(vs[0].interval(0) == Interval::closed(0.75, 1.25));
    CHECK(vs[0].admitted(0) == std::vector<std::size_t>{0});
}

TEST_CASE("conditional similarity with a raw threshold clips the attribute interval")
{
    // raw age 30, 40, 50: mean 40, stddev sqrt(200/3)
    LabeledDataset d;
    d.schema = age_color_schema();
    d.samples = {{30, 1, 0}, {40, 0, 1}, {50, 1, 0}};
    d.labels = {0, 1, 0};
    const auto st = standardize(d, {});
    const auto spec = parse(R"({"kind": "conditional-attribute", "conditional": {
        "attribute": "age", "tau": 37, "tau_space": "raw",
        "below": {"tau": 0.2}, "above": {"tau": 0.4}}})");
    CHECK_THROWS_AS(resolve(spec, d.schema), ConfigError);
    const auto sim = resolve(spec, st.train.schema, &st.stats);
    const double t = st.stats.to_standardized(0, 37.0);
    CHECK(sim.attribute_tau == doctest::Approx(t));

    const auto layout = std::make_shared<const ColumnLayout>(st.train.schema);
    const double age = st.stats.to_standardized(0, 36.0);
    const auto vs = from_similarity(Sample{age, 1, 0}, sim, layout);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].interval(0).lower == doctest::Approx(age - 0.2));
    CHECK(vs[0].interval(0).upper == doctest::Approx(t));
    CHECK_FALSE(vs[0].interval(0).upper_open);

    const double old = st.stats.to_standardized(0, 38.0);
    const auto above = from_similarity(Sample{old, 1, 0}, sim, layout);
    REQUIRE(above.size() == 1);
    CHECK(above[0].interval(0).lower == doctest::Approx(t));
    CHECK(above[0].interval(0).lower_open);
    CHECK(above[0].interval(0).upper == doctest::Approx(old + 0.4));
}

TEST_CASE("the conditional boundary belongs to the lower branch")
{
    const auto schema = age_color_schema();
    const auto layout = std::make_shared<const ColumnLayout>(schema);
    const auto sim = resolve(parse(R"({"kind": "conditional-attribute", "conditional": {
        "attribute": "age", "tau": 1, "below": {"tau": 0.5}, "above": {"tau": 2}}})"),
                             schema);
    const auto vs = from_similarity(Sample{1, 1, 0}, sim, layout);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].interval(0) == Interval::closed(0.5, 1));
}

TEST_CASE("spec JSON round-trips and resolution errors are reported")
{
    const auto spec = parse(R"({"kind": "noise-cat", "name": "nc", "features": ["age"], "tau": 0.3,
                                "sensitive_groups": ["color"]})");
    CHECK(spec.label() == "nc");
    const auto back = SimilaritySpec::from_json(spec.to_json());
    CHECK(back.to_json() == spec.to_json());
    CHECK(parse(R"({"kind": "cat", "sensitive_groups": ["color"]})").label() == "cat");

    const auto schema = age_color_schema();
    CHECK_THROWS_AS(resolve(parse(R"({"kind": "cat", "sensitive_groups": ["race"]})"), schema), DataError);
    CHECK_THROWS_AS(resolve(parse(R"({"kind": "noise", "features": ["height"], "tau": 1})"), schema), DataError);
    CHECK_THROWS_AS(resolve(parse(R"({"kind": "noise", "tau": -1})"), schema), ConfigError);
    CHECK_THROWS_AS(parse(R"({"kind": "fuzzy"})"), ConfigError);
}

TEST_CASE("property: compiled regions are exactly the similar samples")
{
    Rng rng(211);
    for (int kind = 0; kind < 4; ++kind) {
        for (int round = 0; round < 150; ++round) {
            const auto in = oracle::random_instance(rng, kind);
            const auto vs = from_similarity(in.x, in.similarity, in.layout);
            bool self = false;
            for (const auto& v : vs)
                self = self || v.contains(in.x);
            CHECK(self);
            const auto cand = oracle::candidate_values(in.schema, in.forest, in.similarity, in.x);
            oracle::enumerate(in.schema, cand, [&](const Sample& y) {
                bool member = false;
                for (const auto& v : vs)
                    member = member || v.contains(y);
                REQUIRE(member == oracle::similar(in.schema, in.similarity, in.x, y));
                return true;
            });
        }
    }
}
