#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dcolor/color.hpp"
#include "dcolor/error.hpp"
#include "oracles.hpp"

using namespace dcolor;

namespace {

ColorImage solid(int w, int h, double r, double g, double b) {
    ColorImage img(w, h);
    for (double& v : img.r.values()) v = r;
    for (double& v : img.g.values()) v = g;
    for (double& v : img.b.values()) v = b;
    return img;
}

ColorImage random_color(int w, int h, std::mt19937_64& rng) {
    ColorImage img;
    img.r = oracle::random_plane(w, h, rng);
    img.g = oracle::random_plane(w, h, rng);
    img.b = oracle::random_plane(w, h, rng);
    return img;
}

}  // namespace

TEST(RgbToYuv, BlackIsAchromatic) {
    const auto p = rgb_to_yuv(RgbPixel{0, 0, 0});
    EXPECT_EQ(p.y, 0.0);
    EXPECT_EQ(p.u, 0.0);
    EXPECT_EQ(p.v, 0.0);
}

TEST(RgbToYuv, GrayAxisHasNoChroma) {
    const auto [gray, chroma] = rgb_to_yuv(solid(3, 2, 0.5, 0.5, 0.5));
    for (double y : gray.y.values()) EXPECT_NEAR(y, 0.5, 1e-15);
    for (double u : chroma.u.values()) EXPECT_NEAR(u, 0.0, 1e-15);
    for (double v : chroma.v.values()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(RgbToYuv, PureRedByHand) {
    // Y = 0.299; U = 0.564 * (0 - 0.299); V = 0.713 * (1 - 0.299)
    const auto p = rgb_to_yuv(RgbPixel{1, 0, 0});
    EXPECT_NEAR(p.y, 0.299, 1e-12);
    EXPECT_NEAR(p.u, -0.168636, 1e-12);
    EXPECT_NEAR(p.v, 0.499813, 1e-12);
    EXPECT_NEAR(p.u, -0.16864, 1e-5);
    EXPECT_NEAR(p.v, 0.49981, 1e-5);
}

TEST(RgbToYuv, RejectsNonFinite) {
    ColorImage img = solid(2, 2, 0.2, 0.3, 0.4);
    img.g(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(rgb_to_yuv(img), InvalidArgument);
}

TEST(YuvToRgb, MidGray) {
    const GrayImage y(2, 2, 0.5);
    const ChromaPlanes c(2, 2, 0.0);
    const ColorImage rgb = yuv_to_rgb(y, c);
    EXPECT_EQ(rgb, solid(2, 2, 0.5, 0.5, 0.5));  // exact on the gray axis
}

TEST(YuvToRgb, InverseOfPureRed) {
    const GrayImage y(1, 1, 0.299);
    ChromaPlanes c(1, 1);
    c.u(0, 0) = -0.16864;
    c.v(0, 0) = 0.49981;
    const ColorImage rgb = yuv_to_rgb(y, c);
    EXPECT_NEAR(rgb.r(0, 0), 1.0, 1e-4);
    EXPECT_NEAR(rgb.g(0, 0), 0.0, 1e-4);
    EXPECT_NEAR(rgb.b(0, 0), 0.0, 1e-4);
}

TEST(YuvToRgb, RoundTripInGamut) {
    std::mt19937_64 rng(3);
    const ColorImage img = random_color(17, 9, rng);
    const auto [y, c] = rgb_to_yuv(img);
    const ColorImage back = yuv_to_rgb(y, c);
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        EXPECT_NEAR(back.r.values()[i], img.r.values()[i], 1e-6);
        EXPECT_NEAR(back.g.values()[i], img.g.values()[i], 1e-6);
        EXPECT_NEAR(back.b.values()[i], img.b.values()[i], 1e-6);
    }
}

TEST(YuvToRgb, RoundTripAfterQuantization) {
    std::mt19937_64 rng(4);
    const ColorImage img = random_color(16, 16, rng);
    const auto [y, c] = rgb_to_yuv(img);
    const ColorImage back = yuv_to_rgb(y, c);
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        const double q = std::round(back.r.values()[i] * 255.0) / 255.0;
        EXPECT_LE(std::abs(q - img.r.values()[i]), 1.0 / 255.0);
    }
}

TEST(YuvToRgb, ClampsOutOfGamut) {
    const GrayImage y(1, 1, 0.9);
    ChromaPlanes c(1, 1);
    c.v(0, 0) = 0.5;
    const ColorImage rgb = yuv_to_rgb(y, c);
    EXPECT_EQ(rgb.r(0, 0), 1.0);
}

TEST(YuvToRgb, DimensionMismatch) {
    EXPECT_THROW(yuv_to_rgb(GrayImage(4, 4), ChromaPlanes(4, 3)), DimensionMismatch);
}

TEST(ColorProperties, RangesForInGamutInput) {
    std::mt19937_64 rng(5);
    const auto [y, c] = rgb_to_yuv(random_color(32, 32, rng));
    for (double v : y.y.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    for (double v : c.u.values()) EXPECT_LE(std::abs(v), 0.5);
    for (double v : c.v.values()) EXPECT_LE(std::abs(v), 0.5);
}

TEST(FitChroma, KeepsLuminanceAndGamut) {
    std::mt19937_64 rng(6);
    GrayImage y(GrayImage(oracle::random_plane(20, 20, rng)));
    ChromaPlanes c;
    c.u = oracle::random_plane(20, 20, rng, -0.5, 0.5);
    c.v = oracle::random_plane(20, 20, rng, -0.5, 0.5);
    fit_chroma_to_gamut(y, c);
    for (int py = 0; py < 20; ++py) {
        for (int px = 0; px < 20; ++px) {
            const RgbPixel p = yuv_to_rgb_unclamped({y(px, py), c.u(px, py), c.v(px, py)});
            EXPECT_GE(p.r, -1e-12);
            EXPECT_LE(p.r, 1 + 1e-12);
            EXPECT_GE(p.g, -1e-12);
            EXPECT_LE(p.g, 1 + 1e-12);
            EXPECT_GE(p.b, -1e-12);
            EXPECT_LE(p.b, 1 + 1e-12);
            EXPECT_NEAR(kLumaR * p.r + kLumaG * p.g + kLumaB * p.b, y(px, py), 1e-12);
        }
    }
}

TEST(FitChroma, LeavesInGamutUntouched) {
    std::mt19937_64 rng(7);
    ColorImage img;
    img.r = oracle::random_plane(8, 8, rng);
    img.g = oracle::random_plane(8, 8, rng);
    img.b = oracle::random_plane(8, 8, rng);
    auto [y, c] = rgb_to_yuv(img);
    const ChromaPlanes before = c;
    fit_chroma_to_gamut(y, c);
    for (std::size_t i = 0; i < c.u.size(); ++i) {
        EXPECT_NEAR(c.u.values()[i], before.u.values()[i], 1e-12);
        EXPECT_NEAR(c.v.values()[i], before.v.values()[i], 1e-12);
    }
}

TEST(Psnr, IdenticalIsInfinite) {
    std::mt19937_64 rng(8);
    const ColorImage a = random_color(5, 5, rng);
    EXPECT_EQ(psnr(a, a), kPsnrIdentical);
    EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Psnr, ZeroVersusOneIsZeroDb) {
    EXPECT_NEAR(psnr(solid(4, 4, 0, 0, 0), solid(4, 4, 1, 1, 1)), 0.0, 1e-12);
}

TEST(Psnr, OneLsbError) {
    const ColorImage a = solid(6, 6, 0.2, 0.4, 0.6);
    const ColorImage b = solid(6, 6, 0.2 + 1.0 / 255, 0.4 - 1.0 / 255, 0.6 + 1.0 / 255);
    EXPECT_NEAR(psnr(a, b), 20.0 * std::log10(255.0), 1e-9);
    EXPECT_NEAR(psnr(a, b), 48.13, 0.01);
}

TEST(Psnr, Symmetric) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10; ++i) {
        const ColorImage a = random_color(7, 5, rng);
        const ColorImage b = random_color(7, 5, rng);
        EXPECT_EQ(psnr(a, b), psnr(b, a));
    }
}

TEST(Psnr, DimensionMismatch) {
    EXPECT_THROW(psnr(ColorImage(3, 3), ColorImage(3, 4)), DimensionMismatch);
}

TEST(Validate, RejectsOutOfRange) {
    ColorImage img = solid(2, 2, 0.5, 0.5, 0.5);
    img.b(0, 0) = 1.5;
    EXPECT_THROW(validate(img), InvalidArgument);
}
