#include "dcolor/refine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dcolor/error.hpp"
#include "dcolor/parallel.hpp"

namespace dcolor {

void BilateralParams::validate() const {
    if (!(sigma_spatial > 0.0) || !(sigma_range > 0.0) || radius < 1) {
        throw InvalidArgument(fmt::format(
            "bilateral parameters need sigmas > 0 and radius >= 1 (got {}, {}, {})", sigma_spatial,
            sigma_range, radius));
    }
}

namespace {

bool is_constant(const Plane& p) {
    const auto v = p.values();
    return std::all_of(v.begin(), v.end(), [first = v.front()](double x) { return x == first; });
}

}  // namespace

Plane joint_bilateral(const Plane& input, const GrayImage& guide, const BilateralParams& params) {
    auto out = joint_bilateral(std::span<const Plane>(&input, 1), guide, params);
    return std::move(out.front());
}

std::vector<Plane> joint_bilateral(std::span<const Plane> inputs, const GrayImage& guide,
                                   const BilateralParams& params) {
    params.validate();
    for (const Plane& p : inputs) {
        require_same_shape(p, guide.y, "joint bilateral input vs guide");
    }

    std::vector<Plane> outputs(inputs.begin(), inputs.end());
    const int width = guide.width();
    const int height = guide.height();
    if (width == 0 || height == 0) {
        return outputs;
    }

    std::vector<const Plane*> active;
    std::vector<Plane*> targets;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!is_constant(inputs[i])) {
            active.push_back(&inputs[i]);
            targets.push_back(&outputs[i]);
        }
    }
    if (active.empty()) {
        return outputs;
    }

    const int r = params.radius;
    const int side = 2 * r + 1;
    std::vector<double> spatial(static_cast<std::size_t>(side) * side);
    const double inv_two_ss = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
    const double inv_two_sr = 1.0 / (2.0 * params.sigma_range * params.sigma_range);
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            spatial[static_cast<std::size_t>(dy + r) * side + (dx + r)] =
                std::exp(-static_cast<double>(dx * dx + dy * dy) * inv_two_ss);
        }
    }

    const std::size_t planes = active.size();
    const int threads = thread_count();

#pragma omp parallel num_threads(threads)
    {
        std::vector<double> weights(spatial.size());
        std::vector<int> cols(side);
        std::vector<double> sums(planes);

#pragma omp for schedule(static)
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                for (int dx = -r; dx <= r; ++dx) {
                    cols[dx + r] = std::clamp(x + dx, 0, width - 1);
                }
                const double center = guide.y(x, y);
                double norm = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    const int qy = std::clamp(y + dy, 0, height - 1);
                    const std::size_t row = static_cast<std::size_t>(dy + r) * side;
                    for (int k = 0; k < side; ++k) {
                        const double d = guide.y(cols[k], qy) - center;
                        const double w = spatial[row + k] * std::exp(-d * d * inv_two_sr);
                        weights[row + k] = w;
                        norm += w;
                    }
                }
                std::fill(sums.begin(), sums.end(), 0.0);
                for (int dy = -r; dy <= r; ++dy) {
                    const int qy = std::clamp(y + dy, 0, height - 1);
                    const std::size_t row = static_cast<std::size_t>(dy + r) * side;
                    for (std::size_t c = 0; c < planes; ++c) {
                        const Plane& in = *active[c];
                        double acc = 0.0;
                        for (int k = 0; k < side; ++k) {
                            acc += weights[row + k] * in(cols[k], qy);
                        }
                        sums[c] += acc;
                    }
                }
                for (std::size_t c = 0; c < planes; ++c) {
                    (*targets[c])(x, y) = sums[c] / norm;
                }
            }
        }
    }
    return outputs;
}

}  // namespace dcolor
