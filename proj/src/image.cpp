#include "dcolor/image.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dcolor/error.hpp"

namespace dcolor {

Plane::Plane(int width, int height, double fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw InvalidArgument(fmt::format("invalid plane size {}x{}", width, height));
    }
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Plane::Plane(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width < 0 || height < 0 ||
        values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw InvalidArgument(fmt::format("plane {}x{} cannot hold {} samples", width, height,
                                          values_.size()));
    }
}

double Plane::clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return values_[index(x, y)];
}

namespace {

void validate_unit_plane(const Plane& p, const char* name) {
    const auto values = p.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InvalidArgument(fmt::format("{} sample {} at ({}, {}) is outside [0,1]", name, v,
                                              i % static_cast<std::size_t>(p.width()),
                                              i / static_cast<std::size_t>(p.width())));
        }
    }
}

}  // namespace

void validate(const ColorImage& img) {
    require_same_shape(img.r, img.g, "color planes");
    require_same_shape(img.r, img.b, "color planes");
    validate_unit_plane(img.r, "red");
    validate_unit_plane(img.g, "green");
    validate_unit_plane(img.b, "blue");
}

void validate(const GrayImage& img) { validate_unit_plane(img.y, "luminance"); }

void require_same_shape(const Plane& a, const Plane& b, const std::string& what) {
    if (!a.same_shape(b)) {
        throw DimensionMismatch(fmt::format("{}: {}x{} vs {}x{}", what, a.width(), a.height(),
                                            b.width(), b.height()));
    }
}

}  // namespace dcolor
