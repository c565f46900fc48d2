#pragma once

#include <limits>
#include <utility>

#include "dcolor/image.hpp"

namespace dcolor {

// BT.601 luma weights and zero-centered chroma scales.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;
inline constexpr double kChromaU = 0.564;
inline constexpr double kChromaV = 0.713;

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

struct YuvPixel {
    double y, u, v;
};

struct RgbPixel {
    double r, g, b;
};

constexpr YuvPixel rgb_to_yuv(RgbPixel p) {
    const double y = kLumaR * p.r + kLumaG * p.g + kLumaB * p.b;
    return {y, kChromaU * (p.b - y), kChromaV * (p.r - y)};
}

/// Exact inverse of rgb_to_yuv(RgbPixel); no clamping.
constexpr RgbPixel yuv_to_rgb_unclamped(YuvPixel p) {
    const double r = p.y + p.v / kChromaV;
    const double b = p.y + p.u / kChromaU;
    const double g = p.y - (kLumaR * (r - p.y) + kLumaB * (b - p.y)) / kLumaG;
    return {r, g, b};
}

/// Splits an RGB image into luminance and chrominance. Rejects non-finite samples.
std::pair<GrayImage, ChromaPlanes> rgb_to_yuv(const ColorImage& img);

/// Luminance plane only.
GrayImage to_gray(const ColorImage& img);

/// Inverse of rgb_to_yuv followed by a clamp to [0,1].
ColorImage yuv_to_rgb(const GrayImage& y, const ChromaPlanes& c);

/// Scales each pixel's (u,v) toward zero just enough that the inverse transform
/// lands inside the RGB cube. Luminance is untouched, so yuv_to_rgb's clamp
/// becomes a no-op and Y survives the round trip.
void fit_chroma_to_gamut(const GrayImage& y, ChromaPlanes& c);

/// Mean squared error pooled over R, G and B.
double mse(const ColorImage& a, const ColorImage& b);

/// 10·log10(1/MSE) with MAX = 1. Identical images give kPsnrIdentical (+inf).
double psnr(const ColorImage& a, const ColorImage& b);

}  // namespace dcolor
