#include "dcolor/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dcolor/error.hpp"
#include "dcolor/parallel.hpp"

namespace dcolor {

// ---------------------------------------------------------------------------
// SemanticMap

SemanticMap::SemanticMap(int width, int height, std::vector<std::string> categories)
    : width_(width), height_(height), categories_(std::move(categories)) {
    if (width < 0 || height < 0) {
        throw InvalidArgument(fmt::format("invalid semantic map size {}x{}", width, height));
    }
    if (categories_.empty()) {
        throw InvalidArgument("semantic map needs at least one category");
    }
    probs_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                      categories_.size(),
                  0.0);
}

SemanticMap SemanticMap::from_labels(int width, int height, std::span<const std::uint8_t> labels,
                                     std::vector<std::string> categories) {
    SemanticMap map(width, height, std::move(categories));
    if (labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatch(fmt::format("label buffer holds {} values, expected {}x{}",
                                            labels.size(), width, height));
    }
    const std::size_t n = map.category_count();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n) {
            throw InvalidArgument(fmt::format("label {} at pixel {} exceeds category count {}",
                                              static_cast<int>(labels[i]), i, n));
        }
        map.probs_[i * n + labels[i]] = 1.0;
    }
    return map;
}

SemanticMap SemanticMap::uniform(int width, int height, std::vector<std::string> categories) {
    SemanticMap map(width, height, std::move(categories));
    std::fill(map.probs_.begin(), map.probs_.end(), 1.0 / static_cast<double>(map.category_count()));
    return map;
}

Plane SemanticMap::channel(std::size_t category) const {
    Plane out(width_, height_);
    auto dst = out.values();
    const std::size_t n = category_count();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = probs_[i * n + category];
    }
    return out;
}

void SemanticMap::set_channel(std::size_t category, const Plane& plane) {
    if (plane.width() != width_ || plane.height() != height_) {
        throw DimensionMismatch("semantic channel shape mismatch");
    }
    auto src = plane.values();
    const std::size_t n = category_count();
    for (std::size_t i = 0; i < src.size(); ++i) {
        probs_[i * n + category] = src[i];
    }
}

void SemanticMap::validate(double tol) const {
    const std::size_t n = category_count();
    const std::size_t pixels = n == 0 ? 0 : probs_.size() / n;
    for (std::size_t p = 0; p < pixels; ++p) {
        double sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double v = probs_[p * n + c];
            if (!std::isfinite(v) || v < 0.0) {
                throw InvalidArgument(fmt::format("semantic pixel {} has invalid probability {}", p, v));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) {
            throw InvalidArgument(fmt::format("semantic pixel {} sums to {}", p, sum));
        }
    }
}

// ---------------------------------------------------------------------------
// Patch

std::array<double, kPatchSize> patch_feature(const GrayImage& img, int x, int y) {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) {
        throw InvalidArgument(fmt::format("pixel ({}, {}) outside {}x{} image", x, y, img.width(),
                                          img.height()));
    }
    std::array<double, kPatchSize> out{};
    constexpr int half = kPatchSide / 2;
    std::size_t k = 0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            out[k++] = img.y.clamped(x + dx, y + dy);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// DAISY

void DaisyParams::validate() const {
    if (!(ring_radius > 0.0) || !(sigma > 0.0)) {
        throw InvalidArgument(
            fmt::format("DAISY needs ring_radius > 0 and sigma > 0 (got {}, {})", ring_radius, sigma));
    }
}

std::array<Plane, kDaisyOrientations> orientation_maps(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    Plane gx(w, h);
    Plane gy(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            gx(x, y) = 0.5 * (img.y.clamped(x + 1, y) - img.y.clamped(x - 1, y));
            gy(x, y) = 0.5 * (img.y.clamped(x, y + 1) - img.y.clamped(x, y - 1));
        }
    }
    std::array<Plane, kDaisyOrientations> maps;
    for (int o = 0; o < kDaisyOrientations; ++o) {
        const double theta = 2.0 * std::numbers::pi * o / kDaisyOrientations;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        Plane m(w, h);
        auto dst = m.values();
        auto sx = gx.values();
        auto sy = gy.values();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = std::max(0.0, c * sx[i] + s * sy[i]);
        }
        maps[static_cast<std::size_t>(o)] = std::move(m);
    }
    return maps;
}

Plane gaussian_blur(const Plane& p, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        total += v;
    }
    for (double& v : kernel) {
        v /= total;
    }

    const int w = p.width();
    const int h = p.height();
    Plane tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[static_cast<std::size_t>(i + radius)] * p.clamped(x + i, y);
            }
            tmp(x, y) = acc;
        }
    }
    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

std::array<std::array<int, 2>, kDaisyLocations> daisy_offsets(const DaisyParams& params) {
    std::array<std::array<int, 2>, kDaisyLocations> offsets{};
    offsets[0] = {0, 0};
    for (int k = 1; k < kDaisyLocations; ++k) {
        const double phi = 2.0 * std::numbers::pi * (k - 1) / (kDaisyLocations - 1);
        offsets[static_cast<std::size_t>(k)] = {
            static_cast<int>(std::lround(params.ring_radius * std::cos(phi))),
            static_cast<int>(std::lround(params.ring_radius * std::sin(phi)))};
    }
    return offsets;
}

DaisyField daisy_field(const GrayImage& img, const DaisyParams& params) {
    params.validate();
    const int w = img.width();
    const int h = img.height();
    DaisyField field(w, h);
    if (w == 0 || h == 0) {
        return field;
    }

    auto raw = orientation_maps(img);
    std::array<Plane, kDaisyOrientations> smoothed;
    for (std::size_t o = 0; o < raw.size(); ++o) {
        smoothed[o] = gaussian_blur(raw[o], params.sigma);
    }
    const auto offsets = daisy_offsets(params);
    const int threads = thread_count();

#pragma omp parallel for schedule(static) num_threads(threads)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto out = field.at(x, y);
            for (std::size_t loc = 0; loc < offsets.size(); ++loc) {
                const int sx = x + offsets[loc][0];
                const int sy = y + offsets[loc][1];
                double norm2 = 0.0;
                double* hist = out.data() + loc * kDaisyOrientations;
                for (std::size_t o = 0; o < kDaisyOrientations; ++o) {
                    hist[o] = smoothed[o].clamped(sx, sy);
                    norm2 += hist[o] * hist[o];
                }
                // Flat regions keep a zero histogram.
                if (norm2 > 1e-24) {
                    const double inv = 1.0 / std::sqrt(norm2);
                    for (std::size_t o = 0; o < kDaisyOrientations; ++o) {
                        hist[o] *= inv;
                    }
                } else {
                    std::fill(hist, hist + kDaisyOrientations, 0.0);
                }
            }
        }
    }
    return field;
}

// ---------------------------------------------------------------------------
// Semantic smoothing

SmoothedSemantics semantic_feature(const SemanticMap& map, const GrayImage& guide,
                                   const BilateralParams& params) {
    if (map.width() != guide.width() || map.height() != guide.height()) {
        throw DimensionMismatch(fmt::format("semantic map {}x{} vs guide {}x{}", map.width(),
                                            map.height(), guide.width(), guide.height()));
    }
    const std::size_t n = map.category_count();
    std::vector<Plane> planes;
    planes.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
        planes.push_back(map.channel(c));
    }
    const auto filtered = joint_bilateral(planes, guide, params);

    SmoothedSemantics result{SemanticMap(map.width(), map.height(), map.categories()), 0};
    for (std::size_t c = 0; c < n; ++c) {
        result.map.set_channel(c, filtered[c]);
    }
    auto probs = result.map.values();
    const std::size_t pixels = static_cast<std::size_t>(map.width()) * static_cast<std::size_t>(map.height());
    for (std::size_t p = 0; p < pixels; ++p) {
        double* v = probs.data() + p * n;
        double sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            v[c] = std::max(0.0, v[c]);
            sum += v[c];
        }
        if (sum > 0.0 && std::isfinite(sum)) {
            for (std::size_t c = 0; c < n; ++c) {
                v[c] /= sum;
            }
        } else {
            std::fill(v, v + n, 1.0 / static_cast<double>(n));
            ++result.degenerate_pixels;
        }
    }
    if (result.degenerate_pixels > 0) {
        spdlog::warn("semantic smoothing: {} pixel(s) had zero mass and were reset to uniform",
                     result.degenerate_pixels);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Descriptor assembly

void write_descriptor(const GrayImage& img, const DaisyField& daisy, const SemanticMap& semantics,
                      int x, int y, std::span<double> out) {
    constexpr int half = kPatchSide / 2;
    std::size_t k = 0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            out[k++] = img.y.clamped(x + dx, y + dy);
        }
    }
    const auto d = daisy.at(x, y);
    std::copy(d.begin(), d.end(), out.begin() + static_cast<std::ptrdiff_t>(kPatchSize));
    const auto s = semantics.at(x, y);
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(kPatchSize + kDaisySize));
}

FeatureVector assemble_descriptor(const GrayImage& img, const DaisyField& daisy,
                                  const SemanticMap& semantics, int x, int y) {
    if (daisy.width() != img.width() || daisy.height() != img.height() ||
        semantics.width() != img.width() || semantics.height() != img.height()) {
        throw DimensionMismatch("descriptor inputs disagree on image size");
    }
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) {
        throw InvalidArgument(fmt::format("pixel ({}, {}) outside {}x{} image", x, y, img.width(),
                                          img.height()));
    }
    FeatureVector fv;
    fv.values.resize(descriptor_size(semantics.category_count()));
    write_descriptor(img, daisy, semantics, x, y, fv.values);
    return fv;
}

DenseFeatures compute_dense_features(const GrayImage& gray, const SemanticMap& raw_semantics,
                                     const DaisyParams& daisy, const BilateralParams& smoothing) {
    DenseFeatures f;
    f.semantics = semantic_feature(raw_semantics, gray, smoothing).map;
    f.daisy = daisy_field(gray, daisy);
    f.gray = gray;
    return f;
}

}  // namespace dcolor
