#include "fairtree/synthetic.hpp"

#include <cmath>

#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

LabeledDataset generate_synthetic(const SyntheticConfig& cfg)
{
    if (cfg.numeric_features < 2)
        throw ConfigError("synthetic: need at least two numeric features");
    const std::size_t d = cfg.numeric_features;

    LabeledDataset data;
    auto& schema = data.schema;
    for (std::size_t f = 0; f < d; ++f)
        schema.numeric_features.push_back({"x" + std::to_string(f), f});
    schema.categorical_groups.push_back({"group", {"A", "B"}, {d, d + 1}});
    schema.categorical_groups.push_back({"region", {"r0", "r1", "r2"}, {d + 2, d + 3, d + 4}});
    schema.label_column = "label";
    schema.label_values = {"neg", "pos"};
    schema.positive_label = 1;
    schema.validate();

    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        Sample x(schema.dimension(), 0.0);
        const double z = rng.bernoulli(0.5) ? 1.0 : -1.0;
        x[0] = z + 0.5 * rng.normal();
        for (std::size_t f = 1; f < d; ++f)
            x[f] = rng.normal();
        const std::size_t group = rng.uniform_index(2);
        x[d + group] = 1.0;
        x[d + 2 + rng.uniform_index(3)] = 1.0;
        const double logit = cfg.signal * x[0] + 0.5 * x[1] + cfg.sensitive_effect * (group ? 1.0 : -1.0);
        const int y = rng.uniform01() < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0;
        data.samples.push_back(std::move(x));
        data.labels.push_back(y);
    }
    return data;
}

} // namespace fairtree
