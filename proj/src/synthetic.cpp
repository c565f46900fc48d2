#include "dcolor/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "dcolor/clustering.hpp"
#include "dcolor/color.hpp"
#include "dcolor/error.hpp"

namespace dcolor {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

struct Sampler {
    std::mt19937_64 rng;
    double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

// Same luminance model for both skies.
double sky_luma(double v, double gradient_end) { return 0.72 - 0.22 * std::clamp(v / gradient_end, 0.0, 1.0); }

struct Pixel {
    double y, u, v;
    std::uint8_t label;
};

struct Building {
    double left, right, top, luma;
    int salt;
};

void store(SyntheticScene& s, int x, int y, int width, const Pixel& p) {
    const YuvPixel yuv{p.y, p.u, p.v};
    const RgbPixel rgb = yuv_to_rgb_unclamped(yuv);
    s.color.r(x, y) = std::clamp(rgb.r, 0.0, 1.0);
    s.color.g(x, y) = std::clamp(rgb.g, 0.0, 1.0);
    s.color.b(x, y) = std::clamp(rgb.b, 0.0, 1.0);
    s.labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = p.label;
}

void coast(SyntheticScene& s, int width, int height, Sampler& rnd) {
    const double horizon = rnd(0.35, 0.55);
    const double gradient = rnd(0.4, 0.6);
    const double shore = rnd(0.78, 0.9);
    const double shore_slope = rnd(-0.06, 0.06);
    const double waves = rnd(6.0, 10.0);
    const double phase = rnd(0.0, kTau);
    const double ripple = rnd(0.0, kTau);
    const auto sky = static_cast<std::uint8_t>(category_index("sky"));
    const auto sea = static_cast<std::uint8_t>(category_index("sea"));
    const auto sand = static_cast<std::uint8_t>(category_index("sand"));

    for (int y = 0; y < height; ++y) {
        const double v = (y + 0.5) / height;
        for (int x = 0; x < width; ++x) {
            const double u = (x + 0.5) / width;
            Pixel p{};
            if (v < horizon) {
                p.y = sky_luma(v, gradient);
                p.u = 0.10 + 0.15 * (p.y - 0.6);
                p.v = -0.08 - 0.10 * (p.y - 0.6);
                p.label = sky;
            } else if (v < shore + shore_slope * (u - 0.5)) {
                const double t = (v - horizon) / (1.0 - horizon);
                p.y = 0.40 + 0.06 * std::sin(kTau * waves * t + phase) + 0.015 * std::sin(kTau * 3.0 * u + ripple);
                p.u = 0.13 + 0.10 * (p.y - 0.4);
                p.v = -0.11;
                p.label = sea;
            } else {
                p.y = 0.68 + 0.02 * std::sin(kTau * 5.0 * u + phase);
                p.u = -0.07;
                p.v = 0.05;
                p.label = sand;
            }
            store(s, x, y, width, p);
        }
    }
}

void sunset_city(SyntheticScene& s, int width, int height, Sampler& rnd) {
    const double gradient = rnd(0.4, 0.6);
    const double road = rnd(0.86, 0.92);
    std::vector<Building> buildings;
    for (double left = rnd(-0.05, 0.0); left < 1.0;) {
        const double w = rnd(0.1, 0.22);
        buildings.push_back({left, left + w, rnd(0.3, 0.65), rnd(0.25, 0.38), static_cast<int>(rnd(0.0, 3.0))});
        left += w + rnd(0.0, 0.06);
    }
    const double cell = rnd(0.055, 0.07);
    const auto sky = static_cast<std::uint8_t>(category_index("sky"));
    const auto building = static_cast<std::uint8_t>(category_index("building"));
    const auto window = static_cast<std::uint8_t>(category_index("window"));
    const auto road_label = static_cast<std::uint8_t>(category_index("road"));

    for (int y = 0; y < height; ++y) {
        const double v = (y + 0.5) / height;
        for (int x = 0; x < width; ++x) {
            const double u = (x + 0.5) / width;
            Pixel p{};
            const Building* hit = nullptr;
            for (const auto& b : buildings) {
                if (u >= b.left && u < b.right && v >= b.top) {
                    hit = &b;
                }
            }
            if (v >= road) {
                p.y = 0.45;
                p.u = 0.0;
                p.v = 0.0;
                p.label = road_label;
            } else if (hit != nullptr) {
                const double cu = (u - hit->left) / cell;
                const double cv = (v - hit->top) / cell;
                const double fu = cu - std::floor(cu);
                const double fv = cv - std::floor(cv);
                const bool inside = cu > 0.6 && cv > 0.6 && (hit->right - u) > 0.4 * cell;
                const bool lit = (static_cast<int>(cu) * 7 + static_cast<int>(cv) * 13 + hit->salt) % 3 != 0;
                if (inside && lit && fu > 0.25 && fu < 0.75 && fv > 0.25 && fv < 0.75) {
                    p.y = 0.72;
                    p.u = -0.12;
                    p.v = 0.06;
                    p.label = window;
                } else {
                    p.y = hit->luma;
                    p.u = 0.02;
                    p.v = 0.01;
                    p.label = building;
                }
            } else {
                p.y = sky_luma(v, gradient);
                p.u = -0.09 - 0.10 * (p.y - 0.6);
                p.v = 0.10 + 0.10 * (p.y - 0.6);
                p.label = sky;
            }
            store(s, x, y, width, p);
        }
    }
}

}  // namespace

std::string to_string(SceneFamily family) {
    return family == SceneFamily::Coast ? "coast" : "city";
}

const std::vector<std::string>& scene_categories() {
    static const std::vector<std::string> cats = {
        "awning",   "balcony", "bird",     "boat",      "bridge",      "building", "bus",
        "car",      "cow",     "crosswalk", "desert",   "door",        "fence",    "field",
        "grass",    "moon",    "mountain", "person",    "plant",       "pole",     "river",
        "road",     "rock",    "sand",     "sea",       "sidewalk",    "sign",     "sky",
        "staircase", "streetlight", "sun", "tree",      "window"};
    return cats;
}

std::size_t category_index(const std::string& name) {
    const auto& cats = scene_categories();
    const auto it = std::find(cats.begin(), cats.end(), name);
    if (it == cats.end()) {
        throw InvalidArgument(fmt::format("unknown category '{}'", name));
    }
    return static_cast<std::size_t>(it - cats.begin());
}

SyntheticScene make_scene(SceneFamily family, int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) {
        throw InvalidArgument(fmt::format("scene size must be positive (got {}x{})", width, height));
    }
    SyntheticScene s{family, ColorImage(width, height),
                     std::vector<std::uint8_t>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height))};
    Sampler rnd{std::mt19937_64(seed)};
    if (family == SceneFamily::Coast) {
        coast(s, width, height, rnd);
    } else {
        sunset_city(s, width, height, rnd);
    }
    return s;
}

ReferencePair make_scene_reference(SceneFamily family, int width, int height, std::uint64_t seed,
                                   std::string id) {
    SyntheticScene s = make_scene(family, width, height, seed);
    auto sem = SemanticMap::from_labels(width, height, s.labels, scene_categories());
    return make_reference(std::move(id), std::move(s.color), std::move(sem));
}

SyntheticCorpus make_corpus(int train_per_family, int test_per_family, int side, std::uint64_t seed) {
    SyntheticCorpus corpus;
    const SceneFamily families[2] = {SceneFamily::Coast, SceneFamily::SunsetCity};
    int counter[2] = {0, 0};
    auto add = [&](int per_family, std::vector<ReferencePair>& out, std::vector<SceneFamily>& fam) {
        for (int i = 0; i < per_family; ++i) {
            for (int f = 0; f < 2; ++f) {
                const int n = counter[f]++;
                const auto s = derive_seed(seed, static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(n));
                out.push_back(make_scene_reference(families[f], side, side, s,
                                                   fmt::format("{}_{:03d}", to_string(families[f]), n)));
                fam.push_back(families[f]);
            }
        }
    };
    add(train_per_family, corpus.train, corpus.train_family);
    add(test_per_family, corpus.test, corpus.test_family);
    return corpus;
}

}  // namespace dcolor
