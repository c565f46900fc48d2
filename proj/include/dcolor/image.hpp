#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dcolor {

/// Row-major plane of doubles.
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, double fill = 0.0);
    Plane(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& operator()(int x, int y) { return values_[index(x, y)]; }
    double operator()(int x, int y) const { return values_[index(x, y)]; }

    /// Sample with coordinates clamped into the plane (edge replication).
    double clamped(int x, int y) const;

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool same_shape(const Plane& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Plane&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Luminance image, samples in [0,1].
struct GrayImage {
    Plane y;

    GrayImage() = default;
    explicit GrayImage(Plane plane) : y(std::move(plane)) {}
    GrayImage(int width, int height, double fill = 0.0) : y(width, height, fill) {}

    int width() const { return y.width(); }
    int height() const { return y.height(); }
    double operator()(int x, int y_) const { return y(x, y_); }
    bool operator==(const GrayImage&) const = default;
};

/// RGB image, each plane in [0,1].
struct ColorImage {
    Plane r, g, b;

    ColorImage() = default;
    ColorImage(int width, int height, double fill = 0.0)
        : r(width, height, fill), g(width, height, fill), b(width, height, fill) {}

    int width() const { return r.width(); }
    int height() const { return r.height(); }
    bool operator==(const ColorImage&) const = default;
};

/// Zero-centered chrominance, samples in [-0.5,0.5].
struct ChromaPlanes {
    Plane u, v;

    ChromaPlanes() = default;
    ChromaPlanes(int width, int height, double fill = 0.0)
        : u(width, height, fill), v(width, height, fill) {}

    int width() const { return u.width(); }
    int height() const { return u.height(); }
    bool operator==(const ChromaPlanes&) const = default;
};

/// Throws InvalidArgument unless every sample of the color image is finite and in [0,1].
void validate(const ColorImage& img);
void validate(const GrayImage& img);

/// Throws DimensionMismatch naming `what` when shapes differ.
void require_same_shape(const Plane& a, const Plane& b, const std::string& what);

}  // namespace dcolor
