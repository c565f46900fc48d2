#include "dcolor/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dcolor/error.hpp"
#include "dcolor/global_descriptor.hpp"
#include "dcolor/parallel.hpp"
#include "dcolor/refine.hpp"

namespace dcolor {

namespace {

constexpr std::size_t kInferenceChunk = 2048;

struct PreparedImage {
    const ReferencePair* ref = nullptr;
    GistDescriptor gist;
    SemanticHistogram histogram;
    DenseFeatures dense;
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
};

std::vector<std::size_t> sample_pixels(std::size_t pixels, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> idx(pixels);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (count >= pixels) {
        return idx;
    }
    // Partial Fisher-Yates: the first `count` entries are a uniform sample.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pixels - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void prepare(PreparedImage& p, const ColorizerConfig& cfg, std::uint64_t seed) {
    const ReferencePair& ref = *p.ref;
    p.gist = compute_gist(ref.gray);
    p.histogram = semantic_histogram(*ref.semantic);
    p.dense = compute_dense_features(ref.gray, *ref.semantic, cfg.daisy, cfg.semantic_smoothing);

    const auto chroma = rgb_to_yuv(ref.color).second;
    const int width = ref.gray.width();
    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(ref.gray.height());
    const auto chosen = sample_pixels(pixels, static_cast<std::size_t>(cfg.samples_per_image), seed);
    const std::size_t dim = p.dense.dimension();
    p.inputs.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(chosen.size()));
    p.targets.resize(2, static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t j = 0; j < chosen.size(); ++j) {
        const int x = static_cast<int>(chosen[j] % static_cast<std::size_t>(width));
        const int y = static_cast<int>(chosen[j] / static_cast<std::size_t>(width));
        p.dense.write(x, y, std::span<double>(p.inputs.col(static_cast<Eigen::Index>(j)).data(), dim));
        p.targets(0, static_cast<Eigen::Index>(j)) = chroma.u(x, y);
        p.targets(1, static_cast<Eigen::Index>(j)) = chroma.v(x, y);
    }
}

bool usable(const ReferencePair& ref, const std::vector<std::string>* categories, std::string& why) {
    if (!ref.semantic) {
        why = "no semantic map";
        return false;
    }
    if (ref.semantic->width() != ref.gray.width() || ref.semantic->height() != ref.gray.height()) {
        why = fmt::format("semantic map {}x{} does not match image {}x{}", ref.semantic->width(),
                          ref.semantic->height(), ref.gray.width(), ref.gray.height());
        return false;
    }
    if (ref.gray.width() < kGistMinSide || ref.gray.height() < kGistMinSide) {
        why = fmt::format("image smaller than {}x{}", kGistMinSide, kGistMinSide);
        return false;
    }
    if (categories != nullptr && ref.semantic->categories() != *categories) {
        why = "category list differs from the rest of the dataset";
        return false;
    }
    return true;
}

SemanticMap checked_semantics(const GrayImage& target, const std::optional<SemanticMap>& semantic,
                              const Model& model) {
    if (!semantic) {
        spdlog::warn("no semantic map supplied; using a uniform prior over {} categories",
                     model.categories.size());
        return SemanticMap::uniform(target.width(), target.height(), model.categories);
    }
    if (semantic->width() != target.width() || semantic->height() != target.height()) {
        throw DimensionMismatch(fmt::format("semantic map is {}x{} but the image is {}x{}",
                                            semantic->width(), semantic->height(), target.width(),
                                            target.height()));
    }
    if (semantic->category_count() != model.categories.size()) {
        throw InvalidArgument(fmt::format("semantic map has {} categories, model expects {}",
                                          semantic->category_count(), model.categories.size()));
    }
    return *semantic;
}

}  // namespace

ReferencePair make_reference(std::string id, ColorImage color, std::optional<SemanticMap> semantic) {
    validate(color);
    ReferencePair ref;
    ref.id = std::move(id);
    ref.gray = to_gray(color);
    ref.color = std::move(color);
    ref.semantic = std::move(semantic);
    return ref;
}

TrainOutput train_model(const std::vector<ReferencePair>& dataset, const ColorizerConfig& cfg) {
    cfg.validate();
    TrainOutput out;

    std::vector<PreparedImage> prepared;
    const std::vector<std::string>* categories = nullptr;
    for (const ReferencePair& ref : dataset) {
        std::string why;
        if (!usable(ref, categories, why)) {
            spdlog::warn("skipping reference image '{}': {}", ref.id, why);
            out.report.skipped_ids.push_back(ref.id);
            continue;
        }
        if (categories == nullptr) {
            categories = &ref.semantic->categories();
        }
        prepared.push_back(PreparedImage{&ref, {}, {}, {}, {}, {}});
        out.report.used_ids.push_back(ref.id);
    }
    if (prepared.empty()) {
        throw InvalidArgument("no usable reference images (each needs a matching semantic map)");
    }
    out.report.samples_per_image = static_cast<std::size_t>(cfg.samples_per_image);
    spdlog::info("preparing {} reference image(s), {} sample(s) each", prepared.size(),
                 cfg.samples_per_image);

    {
        std::vector<std::exception_ptr> failures(prepared.size());
        const int threads = thread_count();
        const auto count = static_cast<std::ptrdiff_t>(prepared.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            try {
                prepare(prepared[static_cast<std::size_t>(i)], cfg,
                        derive_seed(cfg.seed, 0x70697865ULL, static_cast<std::uint64_t>(i)));
            } catch (...) {
                failures[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
        for (const auto& f : failures) {
            if (f) {
                std::rethrow_exception(f);
            }
        }
    }

    std::vector<GistDescriptor> gists;
    std::vector<SemanticHistogram> histograms;
    std::vector<std::string> ids;
    for (const auto& p : prepared) {
        gists.push_back(p.gist);
        histograms.push_back(p.histogram);
        ids.push_back(p.ref->id);
    }
    const std::size_t dim = prepared.front().dense.dimension();
    const std::vector<int> sizes = default_layer_sizes(dim);

    const ClusterTrainer trainer = [&](std::span<const std::size_t> members, std::uint64_t seed) {
        Eigen::Index total = 0;
        for (std::size_t m : members) {
            total += prepared[m].inputs.cols();
        }
        TrainingSet set;
        set.inputs.resize(static_cast<Eigen::Index>(dim), total);
        set.targets.resize(2, total);
        Eigen::Index at = 0;
        for (std::size_t m : members) {
            const auto n = prepared[m].inputs.cols();
            set.inputs.middleCols(at, n) = prepared[m].inputs;
            set.targets.middleCols(at, n) = prepared[m].targets;
            at += n;
        }
        TrainConfig tcfg = cfg.training;
        tcfg.seed = derive_seed(seed, 0x7368756666ULL);
        Network init = init_network(sizes, derive_seed(seed, 0x696e6974ULL), tcfg.weight_init_scale);
        TrainResult trained = train(std::move(init), set, tcfg);
        // E(I) must be measured with exactly the parameters the model file stores.
        trained.network.round_to_binary32();
        const double final_loss = loss(trained.network, set);
        return TrainedNetwork{std::move(trained.network), std::move(trained.loss_history), final_loss};
    };
    const TrainingErrorFn error_fn = [&](std::size_t image, const Network& net) {
        const ColorImage result = colorize_with_network(prepared[image].dense, net, true, cfg.chroma_refine);
        return training_error(result, prepared[image].ref->color);
    };

    HierarchyResult hierarchy =
        adaptive_cluster_train(HierarchyImages{gists, histograms, ids}, cfg.clustering, trainer, error_fn);

    out.model.config = cfg;
    out.model.categories = *categories;
    out.model.clusters = hierarchy.clusters;
    out.model.networks = std::move(hierarchy.networks);
    hierarchy.networks.clear();
    out.report.hierarchy = std::move(hierarchy);
    out.model.validate();
    spdlog::info("trained {} cluster(s) over {} layer(s); stop reason: {}", out.model.clusters.size(),
                 out.report.hierarchy.layer_members.size(), to_string(out.report.hierarchy.stop));
    return out;
}

ChromaPlanes predict_chroma(const DenseFeatures& features, const Network& net) {
    const std::size_t dim = features.dimension();
    if (net.input_size() != dim || net.output_size() != 2) {
        throw InvalidArgument(fmt::format("network maps {} -> {}, features have {} dimensions",
                                          net.input_size(), net.output_size(), dim));
    }
    const int width = features.width();
    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(features.height());
    ChromaPlanes chroma(width, features.height());
    auto u = chroma.u.values();
    auto v = chroma.v.values();
    const auto chunks = static_cast<std::ptrdiff_t>((pixels + kInferenceChunk - 1) / kInferenceChunk);
    const int threads = thread_count();

#pragma omp parallel num_threads(threads)
    {
        Eigen::MatrixXd batch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t c = 0; c < chunks; ++c) {
            const std::size_t begin = static_cast<std::size_t>(c) * kInferenceChunk;
            const std::size_t count = std::min(kInferenceChunk, pixels - begin);
            batch.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
            for (std::size_t j = 0; j < count; ++j) {
                const std::size_t p = begin + j;
                features.write(static_cast<int>(p % static_cast<std::size_t>(width)),
                               static_cast<int>(p / static_cast<std::size_t>(width)),
                               std::span<double>(batch.col(static_cast<Eigen::Index>(j)).data(), dim));
            }
            const Eigen::MatrixXd out = net.forward(batch);
            for (std::size_t j = 0; j < count; ++j) {
                u[begin + j] = out(0, static_cast<Eigen::Index>(j));
                v[begin + j] = out(1, static_cast<Eigen::Index>(j));
            }
        }
    }
    return chroma;
}

ColorImage compose_output(const GrayImage& gray, ChromaPlanes chroma, bool refine,
                          const BilateralParams& params, ChromaPlanes* final_chroma) {
    for (double& x : chroma.u.values()) {
        x = std::clamp(x, -0.5, 0.5);
    }
    for (double& x : chroma.v.values()) {
        x = std::clamp(x, -0.5, 0.5);
    }
    if (refine) {
        const Plane planes[2] = {chroma.u, chroma.v};
        auto filtered = joint_bilateral(planes, gray, params);
        chroma.u = std::move(filtered[0]);
        chroma.v = std::move(filtered[1]);
    }
    fit_chroma_to_gamut(gray, chroma);
    ColorImage rgb = yuv_to_rgb(gray, chroma);
    if (final_chroma != nullptr) {
        *final_chroma = std::move(chroma);
    }
    return rgb;
}

ColorImage colorize_with_network(const DenseFeatures& features, const Network& net, bool refine,
                                 const BilateralParams& params) {
    return compose_output(features.gray, predict_chroma(features, net), refine, params);
}

std::size_t select_model_cluster(const GrayImage& target, const SemanticMap& semantic,
                                 const Model& model, std::size_t top_k) {
    std::vector<GistDescriptor> centers;
    std::vector<SemanticHistogram> hists;
    centers.reserve(model.clusters.size());
    hists.reserve(model.clusters.size());
    for (const Cluster& c : model.clusters) {
        centers.push_back(c.center);
        hists.push_back(c.histogram);
    }
    if (centers.size() == 1) {
        return 0;
    }
    return select_cluster(compute_gist(target), semantic_histogram(semantic), centers, hists, top_k);
}

Colorization colorize_detailed(const GrayImage& target, const std::optional<SemanticMap>& semantic,
                               const Model& model, const ColorizeOptions& options) {
    model.validate();
    validate(target);
    const SemanticMap sem = checked_semantics(target, semantic, model);
    const int k = options.top_k.value_or(model.config.top_k);
    if (k < 1) {
        throw InvalidArgument(fmt::format("top_k must be >= 1 (got {})", k));
    }

    Colorization result;
    result.cluster = select_model_cluster(target, sem, model, static_cast<std::size_t>(k));
    const Network& net = model.networks[model.clusters[result.cluster].network];
    const DenseFeatures dense =
        compute_dense_features(target, sem, model.config.daisy, model.config.semantic_smoothing);
    result.image = compose_output(target, predict_chroma(dense, net), options.refine,
                                  model.config.chroma_refine, &result.chroma);
    return result;
}

ColorImage colorize(const GrayImage& target, const std::optional<SemanticMap>& semantic,
                    const Model& model, const ColorizeOptions& options) {
    return colorize_detailed(target, semantic, model, options).image;
}

double training_error(const ColorImage& colorized, const ColorImage& truth) {
    return -psnr(colorized, truth);
}

// ---------------------------------------------------------------------------
// Evaluation

EvaluationReport summarize(std::vector<EvaluationRow> rows) {
    EvaluationReport report;
    std::sort(rows.begin(), rows.end(),
              [](const EvaluationRow& a, const EvaluationRow& b) { return a.image < b.image; });
    report.rows = std::move(rows);
    report.histogram.assign(kHistogramBins, 0);

    std::vector<double> ok;
    for (const auto& row : report.rows) {
        if (row.error) {
            ++report.failures;
            continue;
        }
        ok.push_back(row.psnr_db);
        const double rel = (row.psnr_db - kHistogramFirstEdge) / kHistogramStep;
        std::size_t bin = 0;
        if (rel >= 0.0) {
            bin = std::min<std::size_t>(kHistogramBins - 1, static_cast<std::size_t>(rel) + 1);
        }
        ++report.histogram[bin];
    }
    if (ok.empty()) {
        report.mean_db = std::numeric_limits<double>::quiet_NaN();
        report.median_db = std::numeric_limits<double>::quiet_NaN();
        return report;
    }
    report.mean_db = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
    std::sort(ok.begin(), ok.end());
    const std::size_t mid = ok.size() / 2;
    report.median_db = ok.size() % 2 == 1 ? ok[mid] : 0.5 * (ok[mid - 1] + ok[mid]);
    return report;
}

std::string EvaluationReport::summary() const {
    std::string hist;
    for (std::size_t b = 0; b < histogram.size(); ++b) {
        std::string label;
        if (b == 0) {
            label = fmt::format("<{:g}", kHistogramFirstEdge);
        } else if (b + 1 == histogram.size()) {
            label = fmt::format(">={:g}", kHistogramFirstEdge + kHistogramStep * static_cast<double>(b - 1));
        } else {
            const double lo = kHistogramFirstEdge + kHistogramStep * static_cast<double>(b - 1);
            label = fmt::format("{:g}-{:g}", lo, lo + kHistogramStep);
        }
        hist += fmt::format("{}{}:{}", b == 0 ? "" : " ", label, histogram[b]);
    }
    return fmt::format("images={} failures={} mean_db={:.4f} median_db={:.4f} histogram=[{}]",
                       rows.size(), failures, mean_db, median_db, hist);
}

EvaluationReport evaluate(const std::vector<ReferencePair>& dataset, const Model& model,
                          const ColorizeOptions& options) {
    std::vector<EvaluationRow> rows;
    rows.reserve(dataset.size());
    for (const ReferencePair& ref : dataset) {
        EvaluationRow row;
        row.image = ref.id;
        try {
            const ColorImage out = colorize(ref.gray, ref.semantic, model, options);
            row.psnr_db = psnr(out, ref.color);
        } catch (const std::exception& e) {
            spdlog::error("evaluation of '{}' failed: {}", ref.id, e.what());
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return summarize(std::move(rows));
}

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
    out << "image,psnr_db\n";
    for (const auto& row : report.rows) {
        if (row.error) {
            out << row.image << ",error\n";
        } else {
            out << row.image << ',' << fmt::format("{:.6f}", row.psnr_db) << '\n';
        }
    }
}

}  // namespace dcolor
