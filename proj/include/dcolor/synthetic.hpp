#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcolor/image.hpp"
#include "dcolor/pipeline.hpp"

namespace dcolor {

/// Procedural scene families used for demos and end-to-end tests. Both share
/// a "sky" region with identical luminance statistics but different hues, so
/// one global regressor cannot fit both.
enum class SceneFamily { Coast, SunsetCity };

std::string to_string(SceneFamily family);

/// A 33-entry outdoor category list.
const std::vector<std::string>& scene_categories();

std::size_t category_index(const std::string& name);

struct SyntheticScene {
    SceneFamily family;
    ColorImage color;
    std::vector<std::uint8_t> labels;  // row-major category indices
};

SyntheticScene make_scene(SceneFamily family, int width, int height, std::uint64_t seed);

ReferencePair make_scene_reference(SceneFamily family, int width, int height, std::uint64_t seed,
                                   std::string id);

struct SyntheticCorpus {
    std::vector<ReferencePair> train;
    std::vector<ReferencePair> test;
    std::vector<SceneFamily> train_family;
    std::vector<SceneFamily> test_family;
};

/// Alternates families; ids look like "coast_007".
SyntheticCorpus make_corpus(int train_per_family, int test_per_family, int side, std::uint64_t seed);

}  // namespace dcolor
