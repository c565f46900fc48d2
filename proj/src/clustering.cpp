#include "dcolor/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dcolor/error.hpp"
#include "dcolor/parallel.hpp"

namespace dcolor {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

std::vector<std::vector<double>> plus_plus_seeds(std::span<const std::vector<double>> points,
                                                 std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centers;
    std::vector<bool> chosen(n, false);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t pick = first(rng);
    centers.push_back(points[pick]);
    chosen[pick] = true;

    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
            total += chosen[i] ? 0.0 : d2[i];
        }
        if (total > 0.0) {
            const double target = unit(rng) * total;
            double acc = 0.0;
            pick = n;
            std::size_t last_candidate = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || d2[i] == 0.0) {
                    continue;
                }
                last_candidate = i;
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                pick = last_candidate;
            }
        } else {
            // Every remaining point coincides with a center.
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        centers.push_back(points[pick]);
        chosen[pick] = true;
    }
    return centers;
}

std::vector<std::size_t> assign_all(std::span<const std::vector<double>> points,
                                    std::span<const std::vector<double>> centers) {
    std::vector<std::size_t> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = nearest_center(points[i], centers);
    }
    return out;
}

std::vector<std::vector<double>> update_centers(std::span<const std::vector<double>> points,
                                                std::span<const std::size_t> assignments,
                                                std::span<const std::vector<double>> previous) {
    const std::size_t k = previous.size();
    const std::size_t dim = points.front().size();
    std::vector<std::vector<double>> centers(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& c = centers[assignments[i]];
        for (std::size_t d = 0; d < dim; ++d) {
            c[d] += points[i][d];
        }
        ++counts[assignments[i]];
    }
    std::vector<std::size_t> empty;
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            empty.push_back(j);
            continue;
        }
        for (double& v : centers[j]) {
            v /= static_cast<double>(counts[j]);
        }
    }
    if (empty.empty()) {
        return centers;
    }
    // Re-seed each empty cluster at the point currently farthest from its center.
    std::vector<double> cost(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        cost[i] = counts[assignments[i]] == 0 ? 0.0 : squared_distance(points[i], centers[assignments[i]]);
    }
    for (std::size_t j : empty) {
        const auto far = static_cast<std::size_t>(std::max_element(cost.begin(), cost.end()) - cost.begin());
        centers[j] = points[far];
        cost[far] = -1.0;
    }
    return centers;
}

struct LloydRun {
    std::vector<std::vector<double>> centers;
    std::vector<std::size_t> assignments;
    std::vector<double> history;
};

LloydRun lloyd(std::span<const std::vector<double>> points, std::vector<std::vector<double>> centers,
               int max_iters) {
    LloydRun run;
    run.assignments = assign_all(points, centers);
    run.history.push_back(sum_squared_error(points, centers, run.assignments));
    for (int it = 0; it < max_iters; ++it) {
        auto next_centers = update_centers(points, run.assignments, centers);
        auto next = assign_all(points, next_centers);
        run.history.push_back(sum_squared_error(points, next_centers, next));
        centers = std::move(next_centers);
        const bool stable = next == run.assignments;
        run.assignments = std::move(next);
        if (stable) {
            break;
        }
    }
    run.centers = std::move(centers);
    return run;
}

}  // namespace

double sum_squared_error(std::span<const std::vector<double>> points,
                         std::span<const std::vector<double>> centers,
                         std::span<const std::size_t> assignments) {
    double sse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        sse += squared_distance(points[i], centers[assignments[i]]);
    }
    return sse;
}

std::size_t nearest_center(std::span<const double> point, std::span<const std::vector<double>> centers) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double d = squared_distance(point, centers[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t k, const KMeansConfig& cfg) {
    if (k == 0) {
        throw InvalidArgument("k-means needs k >= 1");
    }
    if (k > points.size()) {
        throw InvalidArgument(fmt::format("k-means with k = {} exceeds the {} points", k, points.size()));
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw DimensionMismatch("k-means points differ in dimension");
        }
    }
    std::mt19937_64 rng(cfg.seed);
    KMeansResult best;
    best.sse = std::numeric_limits<double>::infinity();
    const int restarts = std::max(1, cfg.restarts);
    for (int r = 0; r < restarts; ++r) {
        LloydRun run = lloyd(points, plus_plus_seeds(points, k, rng), cfg.max_iters);
        const double sse = run.history.back();
        best.sse_history.push_back(run.history);
        if (sse < best.sse) {
            best.sse = sse;
            best.centers = std::move(run.centers);
            best.assignments = std::move(run.assignments);
            best.best_restart = static_cast<std::size_t>(r);
        }
    }
    return best;
}

std::size_t mu_required(double alpha, std::size_t n_weights, std::size_t n_samples_per_image) {
    if (n_samples_per_image == 0) {
        throw InvalidArgument("mu_required: samples per image must be positive");
    }
    if (!(alpha > 0.0) || n_weights == 0) {
        throw InvalidArgument("mu_required: alpha and weight count must be positive");
    }
    return static_cast<std::size_t>(
        std::ceil(alpha * static_cast<double>(n_weights) / static_cast<double>(n_samples_per_image)));
}

void ClusterConfig::validate() const {
    if (mu < 1) {
        throw InvalidArgument(fmt::format("mu must be >= 1 (got {})", mu));
    }
    if (n0 < 1) {
        throw InvalidArgument(fmt::format("n0 must be >= 1 (got {})", n0));
    }
    if (max_layers < 1 || kmeans_max_iters < 1) {
        throw InvalidArgument("max_layers and kmeans_max_iters must be >= 1");
    }
    if (std::isnan(epsilon)) {
        throw InvalidArgument("epsilon is NaN");
    }
}

std::string_view to_string(HierarchyStop stop) {
    switch (stop) {
    case HierarchyStop::BelowMu:
        return "below-mu";
    case HierarchyStop::Stagnation:
        return "stagnation";
    case HierarchyStop::MaxLayers:
        return "max-layers";
    case HierarchyStop::Degenerate:
        return "degenerate";
    }
    return "unknown";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ a) ^ b);
}

namespace {

SemanticHistogram mean_histogram(std::span<const SemanticHistogram> all, std::span<const std::size_t> members) {
    SemanticHistogram h{std::vector<double>(all[members.front()].bins.size(), 0.0)};
    for (std::size_t m : members) {
        for (std::size_t c = 0; c < h.bins.size(); ++c) {
            h.bins[c] += all[m].bins[c];
        }
    }
    double total = 0.0;
    for (double& b : h.bins) {
        b /= static_cast<double>(members.size());
        total += b;
    }
    if (total > 0.0) {
        for (double& b : h.bins) {
            b /= total;
        }
    }
    return h;
}

GistDescriptor mean_gist(std::span<const GistDescriptor> all, std::span<const std::size_t> members) {
    GistDescriptor g{std::vector<double>(all[members.front()].values.size(), 0.0)};
    for (std::size_t m : members) {
        for (std::size_t d = 0; d < g.values.size(); ++d) {
            g.values[d] += all[m].values[d];
        }
    }
    for (double& v : g.values) {
        v /= static_cast<double>(members.size());
    }
    return g;
}

struct LayerCluster {
    std::vector<std::size_t> members;
    TrainedNetwork trained;
    std::vector<double> errors;
};

}  // namespace

HierarchyResult adaptive_cluster_train(const HierarchyImages& images, const ClusterConfig& cfg,
                                       const ClusterTrainer& trainer,
                                       const TrainingErrorFn& training_error) {
    cfg.validate();
    const std::size_t total = images.gists.size();
    if (total == 0) {
        throw InvalidArgument("adaptive clustering over an empty reference set");
    }
    if (images.histograms.size() != total || images.ids.size() != total) {
        throw DimensionMismatch("reference descriptors, histograms and ids differ in count");
    }

    const std::size_t mu = static_cast<std::size_t>(cfg.mu);
    HierarchyResult result;
    std::vector<std::size_t> current(total);
    std::iota(current.begin(), current.end(), std::size_t{0});

    const bool degenerate = total < mu;
    if (degenerate) {
        spdlog::warn("reference set has {} image(s), fewer than mu = {}; building a single-cluster model",
                     total, mu);
    }
    std::size_t groups = degenerate ? 1 : static_cast<std::size_t>(cfg.n0);

    for (int layer = 0;; ++layer) {
        groups = std::clamp<std::size_t>(groups, 1, current.size());
        std::vector<std::vector<double>> points;
        points.reserve(current.size());
        for (std::size_t idx : current) {
            points.push_back(images.gists[idx].values);
        }
        const KMeansConfig kcfg{cfg.kmeans_max_iters, cfg.kmeans_restarts,
                                derive_seed(cfg.seed, 0x6b6d65616e73ULL, static_cast<std::uint64_t>(layer))};
        const KMeansResult km = kmeans(points, groups, kcfg);

        std::vector<LayerCluster> layer_clusters(groups);
        for (std::size_t i = 0; i < current.size(); ++i) {
            layer_clusters[km.assignments[i]].members.push_back(current[i]);
        }
        // Farthest-point re-seeding keeps clusters non-empty, but guard anyway.
        std::erase_if(layer_clusters, [](const LayerCluster& c) { return c.members.empty(); });

        std::vector<std::exception_ptr> failures(layer_clusters.size());
        const int threads = thread_count();
        const auto count = static_cast<std::ptrdiff_t>(layer_clusters.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::ptrdiff_t ci = 0; ci < count; ++ci) {
            auto& c = layer_clusters[static_cast<std::size_t>(ci)];
            try {
                c.trained = trainer(c.members, derive_seed(cfg.seed, static_cast<std::uint64_t>(layer),
                                                           static_cast<std::uint64_t>(ci)));
                c.errors.reserve(c.members.size());
                for (std::size_t m : c.members) {
                    c.errors.push_back(training_error(m, c.trained.network));
                }
            } catch (...) {
                failures[static_cast<std::size_t>(ci)] = std::current_exception();
            }
        }
        for (const auto& f : failures) {
            if (f) {
                std::rethrow_exception(f);
            }
        }

        std::vector<std::size_t> survivors;
        std::vector<std::pair<std::size_t, double>> layer_err;
        for (auto& c : layer_clusters) {
            Cluster cluster;
            cluster.id = result.clusters.size();
            cluster.layer = layer;
            cluster.center = mean_gist(images.gists, c.members);
            cluster.histogram = mean_histogram(images.histograms, c.members);
            for (std::size_t m : c.members) {
                cluster.members.push_back(images.ids[m]);
            }
            cluster.network = result.networks.size();
            result.networks.push_back(std::move(c.trained.network));
            result.loss_histories.push_back(std::move(c.trained.loss_history));
            result.final_losses.push_back(c.trained.final_loss);
            result.clusters.push_back(std::move(cluster));

            for (std::size_t j = 0; j < c.members.size(); ++j) {
                layer_err.emplace_back(c.members[j], c.errors[j]);
                if (!(c.errors[j] <= cfg.epsilon)) {
                    survivors.push_back(c.members[j]);
                }
            }
        }
        std::sort(layer_err.begin(), layer_err.end());
        std::vector<std::size_t> members_sorted;
        std::vector<double> errors_sorted;
        for (const auto& [idx, err] : layer_err) {
            members_sorted.push_back(idx);
            errors_sorted.push_back(err);
        }
        result.layer_members.push_back(std::move(members_sorted));
        result.layer_errors.push_back(std::move(errors_sorted));
        std::sort(survivors.begin(), survivors.end());

        spdlog::info("layer {}: {} cluster(s) over {} image(s), {} removed, {} survive", layer,
                     layer_clusters.size(), current.size(), current.size() - survivors.size(),
                     survivors.size());

        if (degenerate) {
            result.stop = HierarchyStop::Degenerate;
            break;
        }
        if (survivors.size() < mu) {
            result.stop = HierarchyStop::BelowMu;
            break;
        }
        const std::size_t next_groups = std::max<std::size_t>(1, survivors.size() / mu);
        if (survivors.size() == current.size() && next_groups == layer_clusters.size()) {
            spdlog::warn("layer {} removed no images and the next layer would repeat it; stopping", layer);
            result.stop = HierarchyStop::Stagnation;
            break;
        }
        if (layer + 1 >= cfg.max_layers) {
            spdlog::warn("reached max_layers = {} with {} image(s) still above epsilon", cfg.max_layers,
                         survivors.size());
            result.stop = HierarchyStop::MaxLayers;
            break;
        }
        current = std::move(survivors);
        groups = next_groups;
    }
    return result;
}

}  // namespace dcolor
