#pragma once

#include <span>
#include <vector>

#include "dcolor/image.hpp"

namespace dcolor {

/// Joint bilateral filter parameters. Range sigma is in guide units (unit interval).
struct BilateralParams {
    double sigma_spatial = 5.0;
    double sigma_range = 0.05;
    int radius = 10;

    void validate() const;
    bool operator==(const BilateralParams&) const = default;
};

inline constexpr BilateralParams kChromaRefineDefaults{5.0, 0.05, 10};
inline constexpr BilateralParams kSemanticSmoothDefaults{10.0, 0.1, 15};

/// out(p) = sum_q w(p,q) in(q) / sum_q w(p,q) over a square window with
/// replicated borders, where w combines a spatial Gaussian on the offset and
/// a range Gaussian on the guide difference.
Plane joint_bilateral(const Plane& input, const GrayImage& guide, const BilateralParams& params);

/// Filters several planes against one guide, sharing the per-pixel weights.
/// Planes that are globally constant are copied through unchanged.
std::vector<Plane> joint_bilateral(std::span<const Plane> inputs, const GrayImage& guide,
                                   const BilateralParams& params);

}  // namespace dcolor
