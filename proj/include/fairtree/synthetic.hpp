#pragma once

#include <cstddef>
#include <cstdint>

#include "fairtree/schema.hpp"

namespace fairtree {

/// Generator of a binary task whose labels lean on a sensitive attribute.
///
/// A latent class z in {0, 1} places x0 around -1 or +1 (sd 0.5); the other
/// numerics are standard normal. The sensitive group "group" (categories A
/// and B) and the unrelated "region" (r0, r1, r2) are uniform. The label is
/// drawn with P(pos) = sigmoid(signal * x0 + 0.5 * x1 + sensitive_effect * s),
/// where s is -1 for A and +1 for B, so near the x0 boundary the group
/// decides the most likely label.
struct SyntheticConfig {
    std::size_t samples = 2000;
    std::size_t numeric_features = 6; // at least 2
    double signal = 2.0;
    double sensitive_effect = 1.5;
    std::uint64_t seed = 0;
};

/// Raw (unstandardized) dataset with labels "neg"/"pos", "pos" positive.
LabeledDataset generate_synthetic(const SyntheticConfig& cfg);

} // namespace fairtree
