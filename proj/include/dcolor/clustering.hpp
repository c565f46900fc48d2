#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcolor/global_descriptor.hpp"
#include "dcolor/mlp.hpp"

namespace dcolor {

// ---------------------------------------------------------------------------
// k-means

struct KMeansConfig {
    int max_iters = 100;
    int restarts = 10;
    std::uint64_t seed = 1;
};

struct KMeansResult {
    std::vector<std::vector<double>> centers;
    std::vector<std::size_t> assignments;
    double sse = 0.0;
    /// SSE after every assignment step, one list per restart.
    std::vector<std::vector<double>> sse_history;
    std::size_t best_restart = 0;
};

/// Sum of squared distances from each point to its assigned center.
double sum_squared_error(std::span<const std::vector<double>> points,
                         std::span<const std::vector<double>> centers,
                         std::span<const std::size_t> assignments);

/// Index of the nearest center; ties go to the lowest index.
std::size_t nearest_center(std::span<const double> point, std::span<const std::vector<double>> centers);

/// k-means++ seeding followed by Lloyd iterations until the assignment is
/// stable (or max_iters). Empty clusters are re-seeded from the point farthest
/// from its center. The best of `restarts` independent runs is returned.
KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t k,
                    const KMeansConfig& cfg = {});

// ---------------------------------------------------------------------------
// Adaptive hierarchy

/// ceil(alpha * n_weights / n_samples_per_image).
std::size_t mu_required(double alpha, std::size_t n_weights, std::size_t n_samples_per_image);

struct ClusterConfig {
    double epsilon = -26.0;  // dB; images with E(I) <= epsilon leave the hierarchy
    int mu = 80;
    int n0 = 24;
    int kmeans_max_iters = 100;
    int kmeans_restarts = 10;
    int max_layers = 16;
    std::uint64_t seed = 1;

    void validate() const;
    bool operator==(const ClusterConfig&) const = default;
};

struct Cluster {
    std::size_t id = 0;
    int layer = 0;
    GistDescriptor center;
    SemanticHistogram histogram;
    std::vector<std::string> members;
    std::size_t network = 0;

    bool operator==(const Cluster&) const = default;
};

enum class HierarchyStop {
    BelowMu,      // fewer than mu images survived
    Stagnation,   // a layer removed nothing and the next layer would repeat it
    MaxLayers,
    Degenerate,   // the input set was already smaller than mu
};

std::string_view to_string(HierarchyStop stop);

struct HierarchyResult {
    std::vector<Cluster> clusters;
    std::vector<Network> networks;
    /// Image indices present on each layer, sorted.
    std::vector<std::vector<std::size_t>> layer_members;
    /// For every layer, the training error of each member of layer_members.
    std::vector<std::vector<double>> layer_errors;
    /// Training loss history of each network.
    std::vector<std::vector<double>> loss_histories;
    std::vector<double> final_losses;
    HierarchyStop stop = HierarchyStop::BelowMu;
};

struct HierarchyImages {
    std::span<const GistDescriptor> gists;
    std::span<const SemanticHistogram> histograms;
    std::span<const std::string> ids;
};

struct TrainedNetwork {
    Network network;
    std::vector<double> loss_history;
    /// Loss of the finished network over its whole training set.
    double final_loss = std::numeric_limits<double>::quiet_NaN();
};

/// Trains one network on the given member images.
using ClusterTrainer = std::function<TrainedNetwork(std::span<const std::size_t> members, std::uint64_t seed)>;
/// E(I) in dB (negative PSNR) for one image under a trained network.
using TrainingErrorFn = std::function<double(std::size_t image, const Network& net)>;

/// Layered clustering: cluster the current set, train a network per cluster,
/// drop every image whose training error reaches epsilon, and re-cluster the
/// pooled survivors into floor(size/mu) groups until fewer than mu remain.
HierarchyResult adaptive_cluster_train(const HierarchyImages& images, const ClusterConfig& cfg,
                                       const ClusterTrainer& trainer,
                                       const TrainingErrorFn& training_error);

/// Deterministic seed derivation (splitmix64 of the combined inputs).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace dcolor
