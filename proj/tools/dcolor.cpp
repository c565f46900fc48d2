// dcolor: train a colorization model, colorize images, evaluate on a dataset.

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dcolor/color.hpp"
#include "dcolor/config.hpp"
#include "dcolor/error.hpp"
#include "dcolor/io.hpp"
#include "dcolor/model.hpp"
#include "dcolor/parallel.hpp"
#include "dcolor/pipeline.hpp"
#include "dcolor/synthetic.hpp"

namespace fs = std::filesystem;
using namespace dcolor;

namespace {

struct TrainArgs {
    fs::path dataset;
    fs::path out;
    double epsilon = ClusterConfig{}.epsilon;
    int mu = ClusterConfig{}.mu;
    int n0 = ClusterConfig{}.n0;
    int samples = ColorizerConfig{}.samples_per_image;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> batch;
    std::optional<int> max_layers;
};

struct ColorizeArgs {
    fs::path model;
    fs::path input;
    fs::path output;
    std::optional<fs::path> semantic;
    bool no_refine = false;
    std::optional<int> topk;
};

struct EvaluateArgs {
    fs::path model;
    fs::path dataset;
    fs::path out;
    bool no_refine = false;
    std::optional<int> topk;
};

struct SynthArgs {
    fs::path out;
    int train = 25;
    int test = 5;
    int size = 64;
    std::uint64_t seed = 7;
};

void write_training_log(const fs::path& path, const TrainOutput& result) {
    std::ofstream log(path, std::ios::trunc);
    if (!log) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    log << "config " << to_json(result.model.config).dump(2) << "\n";
    log << fmt::format("used {} skipped {}\n", result.report.used_ids.size(), result.report.skipped_ids.size());
    for (const auto& id : result.report.skipped_ids) {
        log << "skipped " << id << "\n";
    }
    const auto& h = result.report.hierarchy;
    for (std::size_t l = 0; l < h.layer_members.size(); ++l) {
        std::size_t clusters = 0;
        for (const auto& c : result.model.clusters) {
            clusters += c.layer == static_cast<int>(l) ? 1 : 0;
        }
        double mean = 0.0;
        for (double e : h.layer_errors[l]) {
            mean += e;
        }
        if (!h.layer_errors[l].empty()) {
            mean /= static_cast<double>(h.layer_errors[l].size());
        }
        log << fmt::format("layer {} images {} clusters {} mean_error_db {:.4f}\n", l, h.layer_members[l].size(),
                           clusters, mean);
    }
    for (const auto& c : result.model.clusters) {
        const auto& hist = h.loss_histories[c.network];
        log << fmt::format("cluster {} layer {} members {} last_epoch_loss {:.6g} final_loss {:.6g}\n", c.id,
                           c.layer, c.members.size(), hist.empty() ? std::nan("") : hist.back(),
                           h.final_losses[c.network]);
    }
    log << "stop " << to_string(h.stop) << "\n";
}

int run_train(const TrainArgs& a) {
    ColorizerConfig cfg;
    cfg.clustering.epsilon = a.epsilon;
    cfg.clustering.mu = a.mu;
    cfg.clustering.n0 = a.n0;
    cfg.samples_per_image = a.samples;
    if (a.seed) {
        cfg.apply_seed(*a.seed);
    }
    if (a.epochs) {
        cfg.training.epochs = *a.epochs;
    }
    if (a.lr) {
        cfg.training.learning_rate = *a.lr;
    }
    if (a.batch) {
        cfg.training.batch_size = *a.batch;
    }
    if (a.max_layers) {
        cfg.clustering.max_layers = *a.max_layers;
    }
    cfg.validate();

    const auto dataset = load_dataset(a.dataset);
    spdlog::info("loaded {} image(s) from {}", dataset.size(), a.dataset.string());
    const TrainOutput result = train_model(dataset, cfg);
    save_model(result.model, a.out);
    fs::path log_path = a.out;
    log_path += ".log";
    write_training_log(log_path, result);
    spdlog::info("model written to {} (log {})", a.out.string(), log_path.string());
    return 0;
}

int run_colorize(const ColorizeArgs& a) {
    const Model model = load_model(a.model);
    const GrayImage gray = read_png_gray(a.input);
    std::optional<SemanticMap> sem;
    if (a.semantic) {
        sem = read_semantic(*a.semantic, model.categories);
    }
    ColorizeOptions opts;
    opts.refine = !a.no_refine;
    opts.top_k = a.topk;
    const Colorization out = colorize_detailed(gray, sem, model, opts);
    write_png(out.image, a.output);
    spdlog::info("used cluster {} (layer {}); wrote {}", model.clusters[out.cluster].id,
                 model.clusters[out.cluster].layer, a.output.string());
    return 0;
}

int run_evaluate(const EvaluateArgs& a) {
    const Model model = load_model(a.model);
    const auto dataset = load_dataset(a.dataset);
    if (dataset.empty()) {
        spdlog::error("dataset {} contains no images", a.dataset.string());
        return 1;
    }
    ColorizeOptions opts;
    opts.refine = !a.no_refine;
    opts.top_k = a.topk;
    const EvaluationReport report = evaluate(dataset, model, opts);
    std::ofstream csv(a.out, std::ios::trunc);
    if (!csv) {
        throw IoError(fmt::format("cannot open {} for writing", a.out.string()));
    }
    write_report_csv(report, csv);
    std::cout << report.summary() << "\n";
    return report.failures == report.rows.size() ? 1 : 0;
}

int run_synth(const SynthArgs& a) {
    const SyntheticCorpus corpus = make_corpus(a.train, a.test, a.size, a.seed);
    if (!corpus.train.empty()) {
        save_dataset(corpus.train, a.out / "train");
    }
    if (!corpus.test.empty()) {
        save_dataset(corpus.test, a.out / "test");
    }
    spdlog::info("wrote {} training and {} test scenes under {}", corpus.train.size(), corpus.test.size(),
                 a.out.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Example-based colorization of grayscale images"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = -1;
    bool verbose = false;
    bool quiet = false;
    app.add_option("--threads", threads, "Worker threads (0 = all cores; default from DCOLOR_THREADS)");
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Only warnings and errors");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a model from a reference dataset");
    train->add_option("--dataset", ta.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("--out", ta.out, "Output model file")->required();
    train->add_option("--epsilon", ta.epsilon, "Training error threshold in dB (negative PSNR)")->capture_default_str();
    train->add_option("--mu", ta.mu, "Minimum images per cluster")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--n0", ta.n0, "Clusters on the first layer")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--samples", ta.samples, "Pixels sampled per image")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--seed", ta.seed, "Seed for sampling, clustering and training");
    train->add_option("--epochs", ta.epochs, "Training epochs per network");
    train->add_option("--lr", ta.lr, "Learning rate");
    train->add_option("--batch", ta.batch, "Minibatch size");
    train->add_option("--max-layers", ta.max_layers, "Upper bound on hierarchy depth");

    ColorizeArgs ca;
    auto* colorize_cmd = app.add_subcommand("colorize", "Colorize one grayscale image");
    colorize_cmd->add_option("--model", ca.model)->required()->check(CLI::ExistingFile);
    colorize_cmd->add_option("--input", ca.input, "Grayscale PNG")->required()->check(CLI::ExistingFile);
    colorize_cmd->add_option("--output", ca.output, "Output RGB PNG")->required();
    colorize_cmd->add_option("--semantic", ca.semantic, "Label PNG or .prob map")->check(CLI::ExistingFile);
    colorize_cmd->add_flag("--no-refine", ca.no_refine, "Skip chrominance refinement");
    colorize_cmd->add_option("--topk", ca.topk, "Candidate clusters by global descriptor")->check(CLI::PositiveNumber);

    EvaluateArgs ea;
    auto* eval = app.add_subcommand("evaluate", "Colorize a dataset and report PSNR");
    eval->add_option("--model", ea.model)->required()->check(CLI::ExistingFile);
    eval->add_option("--dataset", ea.dataset)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--out", ea.out, "Per-image CSV report")->required();
    eval->add_flag("--no-refine", ea.no_refine, "Skip chrominance refinement");
    eval->add_option("--topk", ea.topk)->check(CLI::PositiveNumber);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Write a procedural two-family dataset");
    synth->add_option("--out", sa.out, "Output directory (gets train/ and test/)")->required();
    synth->add_option("--train-per-family", sa.train, "")->capture_default_str()->check(CLI::NonNegativeNumber);
    synth->add_option("--test-per-family", sa.test, "")->capture_default_str()->check(CLI::NonNegativeNumber);
    synth->add_option("--size", sa.size, "Image side in pixels")->capture_default_str()->check(CLI::Range(16, 4096));
    synth->add_option("--seed", sa.seed, "")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);
    try {
        if (threads >= 0) {
            set_thread_count(threads);
        }
        if (train->parsed()) {
            return run_train(ta);
        }
        if (colorize_cmd->parsed()) {
            return run_colorize(ca);
        }
        if (eval->parsed()) {
            return run_evaluate(ea);
        }
        if (synth->parsed()) {
            return run_synth(sa);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
