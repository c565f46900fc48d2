#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "dcolor/clustering.hpp"
#include "dcolor/features.hpp"
#include "dcolor/mlp.hpp"
#include "dcolor/refine.hpp"

namespace dcolor {

/// Every tunable of training and inference in one place. The model file
/// stores a snapshot of the configuration it was trained with.
struct ColorizerConfig {
    DaisyParams daisy;
    BilateralParams chroma_refine = kChromaRefineDefaults;
    BilateralParams semantic_smoothing = kSemanticSmoothDefaults;
    ClusterConfig clustering;
    TrainConfig training;
    int samples_per_image = 1000;
    int top_k = 5;
    std::uint64_t seed = 1;  // pixel sampling

    /// Sets the sampling, clustering and training seeds together.
    void apply_seed(std::uint64_t s);
    void validate() const;
    bool operator==(const ColorizerConfig&) const = default;
};

nlohmann::json to_json(const ColorizerConfig& cfg);
ColorizerConfig config_from_json(const nlohmann::json& j);

/// Compact JSON with sorted keys; stable byte-for-byte for equal configs.
std::string canonical_json(const ColorizerConfig& cfg);

}  // namespace dcolor
