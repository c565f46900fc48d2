#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcolor/image.hpp"
#include "dcolor/refine.hpp"

namespace dcolor {

inline constexpr int kPatchSide = 7;
inline constexpr std::size_t kPatchSize = kPatchSide * kPatchSide;
inline constexpr int kDaisyLocations = 4;
inline constexpr int kDaisyOrientations = 8;
inline constexpr std::size_t kDaisySize = kDaisyLocations * kDaisyOrientations;

/// Per-pixel descriptor length for a category list of the given size.
constexpr std::size_t descriptor_size(std::size_t categories) {
    return kPatchSize + kDaisySize + categories;
}

/// Per-pixel category distribution. Storage is pixel-major: the N
/// probabilities of a pixel are contiguous.
class SemanticMap {
public:
    SemanticMap() = default;
    /// All-zero map; callers fill it in.
    SemanticMap(int width, int height, std::vector<std::string> categories);

    /// One-hot map from per-pixel category indices. Rejects indices >= N.
    static SemanticMap from_labels(int width, int height, std::span<const std::uint8_t> labels,
                                   std::vector<std::string> categories);
    /// Every pixel gets 1/N.
    static SemanticMap uniform(int width, int height, std::vector<std::string> categories);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t category_count() const { return categories_.size(); }
    const std::vector<std::string>& categories() const { return categories_; }

    std::span<const double> at(int x, int y) const { return {probs_.data() + offset(x, y), category_count()}; }
    std::span<double> at(int x, int y) { return {probs_.data() + offset(x, y), category_count()}; }
    std::span<const double> values() const { return probs_; }
    std::span<double> values() { return probs_; }

    /// Extracts one category as a plane.
    Plane channel(std::size_t category) const;
    void set_channel(std::size_t category, const Plane& plane);

    /// Throws InvalidArgument unless every pixel is a probability vector (sum 1 within tol).
    void validate(double tol = 1e-6) const;

    bool operator==(const SemanticMap&) const = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
               category_count();
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::string> categories_;
    std::vector<double> probs_;
};

/// DAISY sampling geometry: the center plus three ring points at 0/120/240 degrees.
struct DaisyParams {
    double ring_radius = 8.0;
    double sigma = 2.5;

    void validate() const;
    bool operator==(const DaisyParams&) const = default;
};

/// Dense field of 32-value DAISY descriptors, pixel-major.
class DaisyField {
public:
    DaisyField() = default;
    DaisyField(int width, int height)
        : width_(width), height_(height),
          values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kDaisySize) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::span<const double> at(int x, int y) const { return {values_.data() + offset(x, y), kDaisySize}; }
    std::span<double> at(int x, int y) { return {values_.data() + offset(x, y), kDaisySize}; }

    bool operator==(const DaisyField&) const = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
               kDaisySize;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// 7x7 row-major neighborhood around (x, y), borders replicated.
std::array<double, kPatchSize> patch_feature(const GrayImage& img, int x, int y);

/// The eight rectified directional-derivative maps, orientation o at angle 2*pi*o/8,
/// before smoothing. Exposed for testing.
std::array<Plane, kDaisyOrientations> orientation_maps(const GrayImage& img);

/// Separable Gaussian blur with replicated borders, kernel radius ceil(3 sigma).
Plane gaussian_blur(const Plane& p, double sigma);

/// Integer pixel offsets of the four DAISY sample locations.
std::array<std::array<int, 2>, kDaisyLocations> daisy_offsets(const DaisyParams& params);

DaisyField daisy_field(const GrayImage& img, const DaisyParams& params = {});

struct SmoothedSemantics {
    SemanticMap map;
    /// Pixels whose filtered mass vanished and were reset to uniform.
    std::size_t degenerate_pixels = 0;
};

/// Edge-aware smoothing of every category plane guided by the gray image,
/// followed by per-pixel renormalization.
SmoothedSemantics semantic_feature(const SemanticMap& map, const GrayImage& guide,
                                   const BilateralParams& params = kSemanticSmoothDefaults);

/// [patch; daisy; semantic] at one pixel.
struct FeatureVector {
    std::vector<double> values;

    std::span<const double> patch() const { return std::span(values).subspan(0, kPatchSize); }
    std::span<const double> daisy() const { return std::span(values).subspan(kPatchSize, kDaisySize); }
    std::span<const double> semantic() const { return std::span(values).subspan(kPatchSize + kDaisySize); }
    std::size_t size() const { return values.size(); }
};

FeatureVector assemble_descriptor(const GrayImage& img, const DaisyField& daisy,
                                  const SemanticMap& semantics, int x, int y);

/// Same layout as assemble_descriptor, written into `out` (size descriptor_size(N)).
/// No shape checks; used by the dense inner loops.
void write_descriptor(const GrayImage& img, const DaisyField& daisy, const SemanticMap& semantics,
                      int x, int y, std::span<double> out);

/// Everything needed to produce descriptors for any pixel of one image.
struct DenseFeatures {
    GrayImage gray;
    DaisyField daisy;
    SemanticMap semantics;  // smoothed

    int width() const { return gray.width(); }
    int height() const { return gray.height(); }
    std::size_t dimension() const { return descriptor_size(semantics.category_count()); }
    void write(int x, int y, std::span<double> out) const { write_descriptor(gray, daisy, semantics, x, y, out); }
};

DenseFeatures compute_dense_features(const GrayImage& gray, const SemanticMap& raw_semantics,
                                     const DaisyParams& daisy = {},
                                     const BilateralParams& smoothing = kSemanticSmoothDefaults);

}  // namespace dcolor
