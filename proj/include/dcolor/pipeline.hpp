#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcolor/clustering.hpp"
#include "dcolor/color.hpp"
#include "dcolor/config.hpp"
#include "dcolor/features.hpp"
#include "dcolor/model.hpp"

namespace dcolor {

/// One reference image: ground-truth color, its luminance, and (optionally)
/// a semantic map. Images without a semantic map are skipped by training.
struct ReferencePair {
    std::string id;
    ColorImage color;
    GrayImage gray;
    std::optional<SemanticMap> semantic;
};

ReferencePair make_reference(std::string id, ColorImage color, std::optional<SemanticMap> semantic);

struct TrainingReport {
    HierarchyResult hierarchy;  // networks moved into the model; histories kept
    std::vector<std::string> used_ids;
    std::vector<std::string> skipped_ids;
    std::size_t samples_per_image = 0;
};

struct TrainOutput {
    Model model;
    TrainingReport report;
};

/// Builds the colorizer from a reference corpus: global descriptors, the
/// adaptive cluster hierarchy, and per-cluster regressors trained on pixels
/// sampled uniformly from each member image.
TrainOutput train_model(const std::vector<ReferencePair>& dataset, const ColorizerConfig& cfg);

struct ColorizeOptions {
    bool refine = true;
    std::optional<int> top_k;  // defaults to the model's configured value
};

struct Colorization {
    ColorImage image;
    ChromaPlanes chroma;  // after clamping, refinement and gamut fitting
    std::size_t cluster = 0;
};

/// Per-pixel network prediction over a dense feature field (unclamped).
ChromaPlanes predict_chroma(const DenseFeatures& features, const Network& net);

/// Clamp, optionally refine against `gray`, fit to gamut and convert to RGB.
ColorImage compose_output(const GrayImage& gray, ChromaPlanes chroma, bool refine,
                          const BilateralParams& params, ChromaPlanes* final_chroma = nullptr);

/// Colorizes with a fixed network (used for the training error during clustering).
ColorImage colorize_with_network(const DenseFeatures& features, const Network& net, bool refine,
                                 const BilateralParams& params);

/// Selects the cluster for a target image and colorizes every pixel. Without a
/// semantic map, a uniform prior over the model's categories is used.
Colorization colorize_detailed(const GrayImage& target, const std::optional<SemanticMap>& semantic,
                               const Model& model, const ColorizeOptions& options = {});

ColorImage colorize(const GrayImage& target, const std::optional<SemanticMap>& semantic,
                    const Model& model, const ColorizeOptions& options = {});

/// Cluster selection step alone.
std::size_t select_model_cluster(const GrayImage& target, const SemanticMap& semantic,
                                 const Model& model, std::size_t top_k);

/// E(I) = -PSNR of a colorization against its ground truth.
double training_error(const ColorImage& colorized, const ColorImage& truth);

// ---------------------------------------------------------------------------
// Evaluation

struct EvaluationRow {
    std::string image;
    double psnr_db = 0.0;
    std::optional<std::string> error;
};

struct EvaluationReport {
    std::vector<EvaluationRow> rows;  // sorted by image name
    double mean_db = 0.0;             // over successful rows
    double median_db = 0.0;
    std::size_t failures = 0;
    /// Counts per 5 dB bin: (-inf,15), [15,20), ..., [45,50), [50,+inf].
    std::vector<std::size_t> histogram;

    std::string summary() const;
};

inline constexpr double kHistogramFirstEdge = 15.0;
inline constexpr double kHistogramStep = 5.0;
inline constexpr std::size_t kHistogramBins = 9;

EvaluationReport evaluate(const std::vector<ReferencePair>& dataset, const Model& model,
                          const ColorizeOptions& options = {});

/// Builds the summary fields from rows (sorting them by image name).
EvaluationReport summarize(std::vector<EvaluationRow> rows);

/// CSV with header `image,psnr_db`; failed rows carry `error` in the value column.
void write_report_csv(const EvaluationReport& report, std::ostream& out);

}  // namespace dcolor
