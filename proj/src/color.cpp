#include "dcolor/color.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dcolor/error.hpp"

namespace dcolor {

namespace {

void require_finite(const Plane& p, const char* name) {
    for (double v : p.values()) {
        if (!std::isfinite(v)) {
            throw InvalidArgument(fmt::format("non-finite {} sample", name));
        }
    }
}

void require_color_shape(const ColorImage& img) {
    require_same_shape(img.r, img.g, "color planes");
    require_same_shape(img.r, img.b, "color planes");
}

}  // namespace

std::pair<GrayImage, ChromaPlanes> rgb_to_yuv(const ColorImage& img) {
    require_color_shape(img);
    require_finite(img.r, "red");
    require_finite(img.g, "green");
    require_finite(img.b, "blue");

    GrayImage gray(img.width(), img.height());
    ChromaPlanes chroma(img.width(), img.height());
    auto r = img.r.values();
    auto g = img.g.values();
    auto b = img.b.values();
    auto y = gray.y.values();
    auto u = chroma.u.values();
    auto v = chroma.v.values();
    for (std::size_t i = 0; i < r.size(); ++i) {
        const YuvPixel p = rgb_to_yuv(RgbPixel{r[i], g[i], b[i]});
        y[i] = p.y;
        u[i] = p.u;
        v[i] = p.v;
    }
    return {std::move(gray), std::move(chroma)};
}

GrayImage to_gray(const ColorImage& img) { return rgb_to_yuv(img).first; }

ColorImage yuv_to_rgb(const GrayImage& y, const ChromaPlanes& c) {
    require_same_shape(y.y, c.u, "luminance vs chroma");
    require_same_shape(y.y, c.v, "luminance vs chroma");

    ColorImage out(y.width(), y.height());
    auto yy = y.y.values();
    auto u = c.u.values();
    auto v = c.v.values();
    auto r = out.r.values();
    auto g = out.g.values();
    auto b = out.b.values();
    for (std::size_t i = 0; i < yy.size(); ++i) {
        const RgbPixel p = yuv_to_rgb_unclamped(YuvPixel{yy[i], u[i], v[i]});
        r[i] = std::clamp(p.r, 0.0, 1.0);
        g[i] = std::clamp(p.g, 0.0, 1.0);
        b[i] = std::clamp(p.b, 0.0, 1.0);
    }
    return out;
}

void fit_chroma_to_gamut(const GrayImage& y, ChromaPlanes& c) {
    require_same_shape(y.y, c.u, "luminance vs chroma");
    require_same_shape(y.y, c.v, "luminance vs chroma");

    auto yy = y.y.values();
    auto u = c.u.values();
    auto v = c.v.values();
    for (std::size_t i = 0; i < yy.size(); ++i) {
        const double lum = std::clamp(yy[i], 0.0, 1.0);
        // Each channel is lum + t * delta, with t the chroma scale we solve for.
        const RgbPixel full = yuv_to_rgb_unclamped(YuvPixel{lum, u[i], v[i]});
        const double deltas[3] = {full.r - lum, full.g - lum, full.b - lum};
        double t = 1.0;
        for (double d : deltas) {
            if (d > 0.0) {
                t = std::min(t, (1.0 - lum) / d);
            } else if (d < 0.0) {
                t = std::min(t, -lum / d);
            }
        }
        t = std::max(t, 0.0);
        if (t < 1.0) {
            u[i] *= t;
            v[i] *= t;
        }
    }
}

double mse(const ColorImage& a, const ColorImage& b) {
    require_color_shape(a);
    require_color_shape(b);
    require_same_shape(a.r, b.r, "psnr operands");
    const std::size_t n = a.r.size();
    if (n == 0) {
        throw InvalidArgument("mse of empty images");
    }
    double sum = 0.0;
    const Plane* pa[3] = {&a.r, &a.g, &a.b};
    const Plane* pb[3] = {&b.r, &b.g, &b.b};
    for (int ch = 0; ch < 3; ++ch) {
        auto x = pa[ch]->values();
        auto z = pb[ch]->values();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] - z[i];
            sum += d * d;
        }
    }
    return sum / static_cast<double>(3 * n);
}

double psnr(const ColorImage& a, const ColorImage& b) {
    const double err = mse(a, b);
    if (err == 0.0) {
        return kPsnrIdentical;
    }
    return 10.0 * std::log10(1.0 / err);
}

}  // namespace dcolor
