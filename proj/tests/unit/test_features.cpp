#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dcolor/error.hpp"
#include "dcolor/features.hpp"
#include "dcolor/parallel.hpp"
#include "oracles.hpp"

using namespace dcolor;

namespace {

std::vector<std::string> cats(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back("c" + std::to_string(i));
    }
    return out;
}

GrayImage ramp(int w, int h) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            img.y(x, y) = (x + w * y) / static_cast<double>(w * h);
        }
    }
    return img;
}

// Vertical step edge: dark on the left, bright on the right.
GrayImage step_edge(int w, int h, int edge) {
    GrayImage img(w, h, 0.2);
    for (int y = 0; y < h; ++y) {
        for (int x = edge; x < w; ++x) {
            img.y(x, y) = 0.8;
        }
    }
    return img;
}

SemanticMap random_semantics(int w, int h, std::size_t n, std::mt19937_64& rng) {
    SemanticMap m(w, h, cats(n));
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto p = m.at(x, y);
            double s = 0.0;
            for (double& v : p) {
                v = d(rng);
                s += v;
            }
            for (double& v : p) {
                v /= s;
            }
        }
    }
    return m;
}

}  // namespace

TEST(PatchFeature, ConstantImage) {
    const GrayImage img(9, 9, 0.37);
    for (double v : patch_feature(img, 4, 4)) {
        EXPECT_EQ(v, 0.37);
    }
}

TEST(PatchFeature, RampInteriorRowMajor) {
    const GrayImage img = ramp(12, 10);
    const auto p = patch_feature(img, 5, 4);
    std::size_t i = 0;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            EXPECT_EQ(p[i++], img.y(5 + dx, 4 + dy));
        }
    }
}

TEST(PatchFeature, CornerReplicatesEdges) {
    std::mt19937_64 rng(1);
    const GrayImage img(oracle::random_plane(6, 5, rng));
    const auto p = patch_feature(img, 0, 0);
    std::size_t i = 0;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            EXPECT_EQ(p[i++], oracle::clamp_sample(img.y, dx, dy));
        }
    }
}

TEST(PatchFeature, OutOfBoundsRejected) {
    const GrayImage img(5, 5);
    EXPECT_THROW(patch_feature(img, 5, 0), InvalidArgument);
    EXPECT_THROW(patch_feature(img, 0, -1), InvalidArgument);
}

TEST(PatchFeature, TranslationEquivariance) {
    std::mt19937_64 rng(2);
    const GrayImage img(oracle::random_plane(20, 20, rng));
    GrayImage shifted(20, 20);
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) {
            shifted.y(x, y) = img.y.clamped(x - 2, y - 1);
        }
    }
    for (int y = 5; y < 14; ++y) {
        for (int x = 5; x < 14; ++x) {
            EXPECT_EQ(patch_feature(img, x, y), patch_feature(shifted, x + 2, y + 1));
        }
    }
}

TEST(Daisy, ConstantImageIsZero) {
    const DaisyField f = daisy_field(GrayImage(20, 15, 0.6));
    for (int y = 0; y < 15; ++y) {
        for (int x = 0; x < 20; ++x) {
            for (double v : f.at(x, y)) {
                EXPECT_EQ(v, 0.0);
            }
        }
    }
}

TEST(Daisy, OffsetsMatchRingGeometry) {
    const auto o = daisy_offsets(DaisyParams{});
    EXPECT_EQ(o[0], (std::array<int, 2>{0, 0}));
    EXPECT_EQ(o[1], (std::array<int, 2>{8, 0}));
    EXPECT_EQ(o[2], (std::array<int, 2>{-4, 7}));
    EXPECT_EQ(o[3], (std::array<int, 2>{-4, -7}));
}

TEST(Daisy, StepEdgeAgainstDirectConvolution) {
    const int w = 40;
    const int h = 24;
    const GrayImage img = step_edge(w, h, 20);
    const DaisyParams params;
    const DaisyField field = daisy_field(img, params);

    // Oracle: hand-written central differences, rectified projections and a
    // non-separable Gaussian.
    std::vector<Plane> smoothed;
    for (int o = 0; o < kDaisyOrientations; ++o) {
        const double th = 2.0 * std::numbers::pi * o / kDaisyOrientations;
        Plane m(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double gx = 0.5 * (oracle::clamp_sample(img.y, x + 1, y) - oracle::clamp_sample(img.y, x - 1, y));
                const double gy = 0.5 * (oracle::clamp_sample(img.y, x, y + 1) - oracle::clamp_sample(img.y, x, y - 1));
                m(x, y) = std::max(0.0, std::cos(th) * gx + std::sin(th) * gy);
            }
        }
        smoothed.push_back(oracle::gaussian(m, params.sigma));
    }
    const int offsets[4][2] = {{0, 0}, {8, 0}, {-4, 7}, {-4, -7}};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto d = field.at(x, y);
            for (int loc = 0; loc < 4; ++loc) {
                double hist[8];
                double n2 = 0.0;
                for (int o = 0; o < 8; ++o) {
                    hist[o] = oracle::clamp_sample(smoothed[o], x + offsets[loc][0], y + offsets[loc][1]);
                    n2 += hist[o] * hist[o];
                }
                for (int o = 0; o < 8; ++o) {
                    const double expected = n2 > 1e-24 ? hist[o] / std::sqrt(n2) : 0.0;
                    ASSERT_NEAR(d[loc * 8 + o], expected, 1e-9) << x << "," << y << " loc " << loc;
                }
            }
        }
    }

    // On the edge, the center histogram peaks in the bin aligned with the +x gradient.
    for (int y = 0; y < h; ++y) {
        for (int x = 19; x <= 20; ++x) {
            const auto d = field.at(x, y);
            const auto best = std::max_element(d.begin(), d.begin() + 8) - d.begin();
            EXPECT_EQ(best, 0);
        }
    }
}

TEST(Daisy, LengthAndNorms) {
    std::mt19937_64 rng(3);
    const GrayImage img(oracle::random_plane(25, 19, rng));
    const DaisyField f = daisy_field(img);
    for (int y = 0; y < 19; ++y) {
        for (int x = 0; x < 25; ++x) {
            const auto d = f.at(x, y);
            ASSERT_EQ(d.size(), 32u);
            for (int loc = 0; loc < 4; ++loc) {
                double n2 = 0.0;
                for (int o = 0; o < 8; ++o) {
                    n2 += d[loc * 8 + o] * d[loc * 8 + o];
                }
                EXPECT_TRUE(n2 == 0.0 || std::abs(std::sqrt(n2) - 1.0) < 1e-6);
            }
        }
    }
}

TEST(Daisy, DeterministicAcrossThreadCounts) {
    std::mt19937_64 rng(4);
    const GrayImage img(oracle::random_plane(33, 21, rng));
    const int saved = thread_count();
    set_thread_count(1);
    const DaisyField a = daisy_field(img);
    set_thread_count(4);
    const DaisyField b = daisy_field(img);
    set_thread_count(saved);
    EXPECT_EQ(a, b);
}

TEST(SemanticMap, FromLabelsRejectsBadIndex) {
    const std::vector<std::uint8_t> labels = {0, 1, 2, 3};
    EXPECT_THROW(SemanticMap::from_labels(2, 2, labels, cats(3)), InvalidArgument);
    EXPECT_THROW(SemanticMap::from_labels(3, 2, labels, cats(4)), DimensionMismatch);
    EXPECT_NO_THROW(SemanticMap::from_labels(2, 2, labels, cats(4)).validate());
}

TEST(SemanticFeature, SingleLabelUnchanged) {
    std::mt19937_64 rng(5);
    const std::vector<std::uint8_t> labels(16 * 12, 2);
    const SemanticMap m = SemanticMap::from_labels(16, 12, labels, cats(5));
    const auto out = semantic_feature(m, GrayImage(oracle::random_plane(16, 12, rng)));
    EXPECT_EQ(out.map, m);
    EXPECT_EQ(out.degenerate_pixels, 0u);
}

TEST(SemanticFeature, TwoRegionsAgainstBruteForce) {
    const int w = 30;
    const int h = 20;
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h);
    GrayImage guide(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool right = x >= 15;
            labels[static_cast<std::size_t>(y) * w + x] = right ? 1 : 0;
            // Soft luminance ramp across the boundary so the range kernel leaks.
            guide.y(x, y) = 0.4 + 0.01 * x;
        }
    }
    const SemanticMap m = SemanticMap::from_labels(w, h, labels, cats(3));
    const BilateralParams p{3.0, 0.1, 6};
    const auto out = semantic_feature(m, guide, p);

    const Plane c0 = oracle::bilateral(m.channel(0), guide.y, p.sigma_spatial, p.sigma_range, p.radius);
    const Plane c1 = oracle::bilateral(m.channel(1), guide.y, p.sigma_spatial, p.sigma_range, p.radius);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double s = c0(x, y) + c1(x, y);
            EXPECT_NEAR(out.map.at(x, y)[0], c0(x, y) / s, 1e-9);
            EXPECT_NEAR(out.map.at(x, y)[1], c1(x, y) / s, 1e-9);
            EXPECT_EQ(out.map.at(x, y)[2], 0.0);
        }
    }
    // Boundary pixels are mixed; pixels beyond the radius stay one-hot.
    for (int y = 0; y < h; ++y) {
        for (int x = 13; x <= 16; ++x) {
            EXPECT_GT(out.map.at(x, y)[0], 0.0);
            EXPECT_LT(out.map.at(x, y)[0], 1.0);
        }
        EXPECT_NEAR(out.map.at(0, y)[0], 1.0, 1e-6);
        EXPECT_NEAR(out.map.at(w - 1, y)[1], 1.0, 1e-6);
    }
}

TEST(SemanticFeature, RowsSumToOne) {
    std::mt19937_64 rng(6);
    const SemanticMap m = random_semantics(18, 14, 7, rng);
    const auto out = semantic_feature(m, GrayImage(oracle::random_plane(18, 14, rng)));
    for (int y = 0; y < 14; ++y) {
        for (int x = 0; x < 18; ++x) {
            const auto p = out.map.at(x, y);
            EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
            for (double v : p) EXPECT_GE(v, 0.0);
        }
    }
}

TEST(SemanticFeature, ZeroMassBecomesUniform) {
    SemanticMap m(8, 8, cats(4));  // all zeros
    const auto out = semantic_feature(m, GrayImage(8, 8, 0.5));
    EXPECT_EQ(out.degenerate_pixels, 64u);
    for (double v : out.map.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(SemanticFeature, DimensionMismatch) {
    EXPECT_THROW(semantic_feature(SemanticMap::uniform(4, 4, cats(2)), GrayImage(4, 3)), DimensionMismatch);
}

TEST(Descriptor, ConstantGrayOneHot) {
    const GrayImage img(12, 12, 0.5);
    const std::vector<std::uint8_t> labels(144, 0);
    const SemanticMap m = SemanticMap::from_labels(12, 12, labels, cats(33));
    const FeatureVector f = assemble_descriptor(img, daisy_field(img), m, 6, 6);
    ASSERT_EQ(f.size(), 114u);
    for (double v : f.patch()) EXPECT_EQ(v, 0.5);
    for (double v : f.daisy()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(f.semantic()[0], 1.0);
    for (std::size_t i = 1; i < 33; ++i) EXPECT_EQ(f.semantic()[i], 0.0);
}

TEST(Descriptor, LengthAndSliceOrder) {
    std::mt19937_64 rng(7);
    const GrayImage img(oracle::random_plane(22, 18, rng));
    const SemanticMap m = random_semantics(22, 18, 33, rng);
    const DaisyField daisy = daisy_field(img);
    std::uniform_int_distribution<int> px(0, 21);
    std::uniform_int_distribution<int> py(0, 17);
    for (int t = 0; t < 30; ++t) {
        const int x = px(rng);
        const int y = py(rng);
        const FeatureVector f = assemble_descriptor(img, daisy, m, x, y);
        ASSERT_EQ(f.size(), descriptor_size(33));
        ASSERT_EQ(f.size(), 114u);
        const auto patch = patch_feature(img, x, y);
        EXPECT_TRUE(std::equal(patch.begin(), patch.end(), f.patch().begin()));
        EXPECT_TRUE(std::equal(daisy.at(x, y).begin(), daisy.at(x, y).end(), f.daisy().begin()));
        EXPECT_TRUE(std::equal(m.at(x, y).begin(), m.at(x, y).end(), f.semantic().begin()));
    }
}

TEST(Descriptor, DenseWriterMatchesAssemble) {
    std::mt19937_64 rng(8);
    const GrayImage img(oracle::random_plane(20, 16, rng));
    const SemanticMap raw = random_semantics(20, 16, 5, rng);
    const DenseFeatures dense = compute_dense_features(img, raw);
    EXPECT_EQ(dense.dimension(), descriptor_size(5));
    std::vector<double> buf(dense.dimension());
    for (int y = 0; y < 16; y += 3) {
        for (int x = 0; x < 20; x += 3) {
            dense.write(x, y, buf);
            const FeatureVector f = assemble_descriptor(img, dense.daisy, dense.semantics, x, y);
            EXPECT_EQ(buf, f.values);
            const auto sem = f.semantic();
            EXPECT_NEAR(std::accumulate(sem.begin(), sem.end(), 0.0), 1.0, 1e-6);
        }
    }
}

TEST(Descriptor, ShapeMismatchRejected) {
    const GrayImage img(10, 10, 0.5);
    EXPECT_THROW(assemble_descriptor(img, daisy_field(img), SemanticMap::uniform(9, 10, cats(3)), 1, 1),
                 DimensionMismatch);
}

TEST(Descriptor, Deterministic) {
    std::mt19937_64 rng(9);
    const GrayImage img(oracle::random_plane(24, 24, rng));
    const SemanticMap raw = random_semantics(24, 24, 6, rng);
    const DenseFeatures a = compute_dense_features(img, raw);
    const DenseFeatures b = compute_dense_features(img, raw);
    EXPECT_EQ(a.daisy, b.daisy);
    EXPECT_EQ(a.semantics, b.semantics);
}
