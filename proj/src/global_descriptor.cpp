#include "dcolor/global_descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include <fftw3.h>
#include <fmt/format.h>

#include "dcolor/error.hpp"

namespace dcolor {

namespace {

// Planner calls into FFTW are not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) {
            throw Error("fftw_malloc failed");
        }
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* data;
};

struct FftwPlan {
    FftwPlan(int n, fftw_complex* in, fftw_complex* out, int sign) {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_2d(n, n, in, out, sign, FFTW_ESTIMATE);
        if (plan == nullptr) {
            throw Error("fftw plan creation failed");
        }
    }
    ~FftwPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;

    fftw_plan plan;
};

// Signed DFT frequency in cycles per sample for index i of n.
double dft_frequency(int i, int n) {
    return static_cast<double>(i < (n + 1) / 2 ? i : i - n) / static_cast<double>(n);
}

}  // namespace

Plane resize_bilinear(const Plane& src, int width, int height) {
    if (src.empty() || width <= 0 || height <= 0) {
        throw InvalidArgument("resize_bilinear needs non-empty source and target");
    }
    Plane out(width, height);
    const double sx = static_cast<double>(src.width()) / width;
    const double sy = static_cast<double>(src.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
        const int y0 = static_cast<int>(fy);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
            const int x0 = static_cast<int>(fx);
            const double tx = fx - x0;
            const double top = (1.0 - tx) * src.clamped(x0, y0) + tx * src.clamped(x0 + 1, y0);
            const double bottom =
                (1.0 - tx) * src.clamped(x0, y0 + 1) + tx * src.clamped(x0 + 1, y0 + 1);
            out(x, y) = (1.0 - ty) * top + ty * bottom;
        }
    }
    return out;
}

std::vector<double> gabor_transfer(int n, int scale, int orientation) {
    // Radial Gaussian around the scale's peak frequency, angular Gaussian
    // around the orientation; peak frequencies follow a 1.85 ratio from 0.3
    // cycles/pixel.
    const double peak = 0.3 / std::pow(1.85, scale);
    const double angle = std::numbers::pi * orientation / kGistOrientations;
    const double radial_width = 0.35;
    const double angular_width = 16.0 * kGistOrientations * kGistOrientations / (32.0 * 32.0);

    std::vector<double> transfer(static_cast<std::size_t>(n) * n);
    for (int row = 0; row < n; ++row) {
        const double fy = dft_frequency(row, n);
        for (int col = 0; col < n; ++col) {
            const double fx = dft_frequency(col, n);
            const double f = std::hypot(fx, fy);
            double dtheta = std::atan2(fy, fx) - angle;
            dtheta = std::remainder(dtheta, 2.0 * std::numbers::pi);
            const double r = f / peak - 1.0;
            transfer[static_cast<std::size_t>(row) * n + col] =
                std::exp(-10.0 * radial_width * r * r -
                         2.0 * angular_width * std::numbers::pi * dtheta * dtheta);
        }
    }
    transfer[0] = 0.0;
    return transfer;
}

Plane filter_magnitude(const Plane& square, std::span<const double> transfer) {
    const int n = square.width();
    if (square.height() != n || transfer.size() != static_cast<std::size_t>(n) * n) {
        throw DimensionMismatch("filter_magnitude needs a square plane and matching transfer");
    }
    const std::size_t total = static_cast<std::size_t>(n) * n;
    FftwBuffer spatial(total);
    FftwBuffer freq(total);
    FftwPlan forward(n, spatial.data, freq.data, FFTW_FORWARD);
    FftwPlan inverse(n, freq.data, spatial.data, FFTW_BACKWARD);

    auto src = square.values();
    for (std::size_t i = 0; i < total; ++i) {
        spatial.data[i][0] = src[i];
        spatial.data[i][1] = 0.0;
    }
    fftw_execute(forward.plan);
    for (std::size_t i = 0; i < total; ++i) {
        freq.data[i][0] *= transfer[i];
        freq.data[i][1] *= transfer[i];
    }
    fftw_execute(inverse.plan);
    Plane out(n, n);
    auto dst = out.values();
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) {
        dst[i] = std::hypot(spatial.data[i][0], spatial.data[i][1]) * scale;
    }
    return out;
}

GistDescriptor compute_gist(const GrayImage& img) {
    if (img.width() < kGistMinSide || img.height() < kGistMinSide) {
        throw InvalidArgument(fmt::format("gist needs at least {}x{} pixels, got {}x{}", kGistMinSide,
                                          kGistMinSide, img.width(), img.height()));
    }
    Plane square = resize_bilinear(img.y, kGistSide, kGistSide);
    auto values = square.values();
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    for (double& v : values) {
        v -= mean;
    }

    const std::size_t total = static_cast<std::size_t>(kGistSide) * kGistSide;
    FftwBuffer spatial(total);
    FftwBuffer spectrum(total);
    FftwBuffer work(total);
    FftwPlan forward(kGistSide, spatial.data, spectrum.data, FFTW_FORWARD);
    FftwPlan inverse(kGistSide, work.data, spatial.data, FFTW_BACKWARD);
    for (std::size_t i = 0; i < total; ++i) {
        spatial.data[i][0] = values[i];
        spatial.data[i][1] = 0.0;
    }
    fftw_execute(forward.plan);

    GistDescriptor gist;
    gist.values.reserve(kGistSize);
    constexpr int cell = kGistSide / kGistGrid;
    const double norm = 1.0 / static_cast<double>(total);
    for (int s = 0; s < kGistScales; ++s) {
        for (int o = 0; o < kGistOrientations; ++o) {
            const auto transfer = gabor_transfer(kGistSide, s, o);
            for (std::size_t i = 0; i < total; ++i) {
                work.data[i][0] = spectrum.data[i][0] * transfer[i];
                work.data[i][1] = spectrum.data[i][1] * transfer[i];
            }
            fftw_execute(inverse.plan);
            for (int gy = 0; gy < kGistGrid; ++gy) {
                for (int gx = 0; gx < kGistGrid; ++gx) {
                    double acc = 0.0;
                    for (int y = gy * cell; y < (gy + 1) * cell; ++y) {
                        for (int x = gx * cell; x < (gx + 1) * cell; ++x) {
                            const auto& c = spatial.data[static_cast<std::size_t>(y) * kGistSide + x];
                            acc += std::hypot(c[0], c[1]) * norm;
                        }
                    }
                    gist.values.push_back(acc / (cell * cell));
                }
            }
        }
    }
    return gist;
}

SemanticHistogram semantic_histogram(const SemanticMap& map) {
    const std::size_t n = map.category_count();
    SemanticHistogram hist{std::vector<double>(n, 0.0)};
    const auto probs = map.values();
    const std::size_t pixels = n == 0 ? 0 : probs.size() / n;
    if (pixels == 0) {
        throw InvalidArgument("semantic_histogram of an empty map");
    }
    for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t c = 0; c < n; ++c) {
            hist.bins[c] += probs[p * n + c];
        }
    }
    double total = 0.0;
    for (double& b : hist.bins) {
        b /= static_cast<double>(pixels);
        total += b;
    }
    if (total > 0.0) {
        for (double& b : hist.bins) {
            b /= total;
        }
    }
    return hist;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch(fmt::format("distance between {}- and {}-vectors", a.size(), b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch(fmt::format("cosine between {}- and {}-vectors", a.size(), b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::size_t> nearest_by_gist(const GistDescriptor& gist,
                                         std::span<const GistDescriptor> centers, std::size_t k) {
    if (centers.empty()) {
        throw InvalidArgument("cluster selection over an empty cluster list");
    }
    if (k == 0) {
        throw InvalidArgument("cluster selection needs k >= 1");
    }
    std::vector<double> dist(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        dist[i] = euclidean_distance(gist.values, centers[i].values);
    }
    std::vector<std::size_t> order(centers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    order.resize(std::min(k, order.size()));
    return order;
}

std::size_t select_cluster(const GistDescriptor& gist, const SemanticHistogram& hist,
                           std::span<const GistDescriptor> centers,
                           std::span<const SemanticHistogram> histograms, std::size_t k) {
    if (centers.size() != histograms.size()) {
        throw DimensionMismatch("cluster centers and histograms differ in count");
    }
    auto candidates = nearest_by_gist(gist, centers, k);
    std::sort(candidates.begin(), candidates.end());
    std::size_t best = candidates.front();
    double best_sim = cosine_similarity(hist.bins, histograms[best].bins);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double sim = cosine_similarity(hist.bins, histograms[candidates[i]].bins);
        if (sim > best_sim) {
            best_sim = sim;
            best = candidates[i];
        }
    }
    return best;
}

}  // namespace dcolor
