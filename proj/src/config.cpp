#include "dcolor/config.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dcolor/error.hpp"

namespace dcolor {

using nlohmann::json;

void ColorizerConfig::apply_seed(std::uint64_t s) {
    seed = s;
    clustering.seed = s;
    training.seed = s;
}

void ColorizerConfig::validate() const {
    daisy.validate();
    chroma_refine.validate();
    semantic_smoothing.validate();
    clustering.validate();
    training.validate();
    if (samples_per_image < 1) {
        throw InvalidArgument(fmt::format("samples_per_image must be >= 1 (got {})", samples_per_image));
    }
    if (top_k < 1) {
        throw InvalidArgument(fmt::format("top_k must be >= 1 (got {})", top_k));
    }
}

namespace {

json bilateral_json(const BilateralParams& p) {
    return {{"sigma_spatial", p.sigma_spatial}, {"sigma_range", p.sigma_range}, {"radius", p.radius}};
}

// JSON has no infinities; non-finite thresholds travel as strings.
json real_json(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return v > 0 ? "inf" : "-inf";
}

double real_from(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        throw FormatError(fmt::format("bad real value '{}'", s));
    }
    return j.get<double>();
}

BilateralParams bilateral_from(const json& j) {
    return {j.at("sigma_spatial").get<double>(), j.at("sigma_range").get<double>(),
            j.at("radius").get<int>()};
}

}  // namespace

json to_json(const ColorizerConfig& cfg) {
    json j;
    j["daisy"] = {{"ring_radius", cfg.daisy.ring_radius}, {"sigma", cfg.daisy.sigma}};
    j["chroma_refine"] = bilateral_json(cfg.chroma_refine);
    j["semantic_smoothing"] = bilateral_json(cfg.semantic_smoothing);
    j["clustering"] = {{"epsilon", real_json(cfg.clustering.epsilon)},
                       {"mu", cfg.clustering.mu},
                       {"n0", cfg.clustering.n0},
                       {"kmeans_max_iters", cfg.clustering.kmeans_max_iters},
                       {"kmeans_restarts", cfg.clustering.kmeans_restarts},
                       {"max_layers", cfg.clustering.max_layers},
                       {"seed", cfg.clustering.seed}};
    j["training"] = {{"learning_rate", cfg.training.learning_rate},
                     {"momentum", cfg.training.momentum},
                     {"batch_size", cfg.training.batch_size},
                     {"epochs", cfg.training.epochs},
                     {"seed", cfg.training.seed},
                     {"weight_init_scale", cfg.training.weight_init_scale}};
    j["samples_per_image"] = cfg.samples_per_image;
    j["top_k"] = cfg.top_k;
    j["seed"] = cfg.seed;
    return j;
}

ColorizerConfig config_from_json(const json& j) {
    try {
        ColorizerConfig cfg;
        cfg.daisy.ring_radius = j.at("daisy").at("ring_radius").get<double>();
        cfg.daisy.sigma = j.at("daisy").at("sigma").get<double>();
        cfg.chroma_refine = bilateral_from(j.at("chroma_refine"));
        cfg.semantic_smoothing = bilateral_from(j.at("semantic_smoothing"));
        const json& c = j.at("clustering");
        cfg.clustering.epsilon = real_from(c.at("epsilon"));
        cfg.clustering.mu = c.at("mu").get<int>();
        cfg.clustering.n0 = c.at("n0").get<int>();
        cfg.clustering.kmeans_max_iters = c.at("kmeans_max_iters").get<int>();
        cfg.clustering.kmeans_restarts = c.at("kmeans_restarts").get<int>();
        cfg.clustering.max_layers = c.at("max_layers").get<int>();
        cfg.clustering.seed = c.at("seed").get<std::uint64_t>();
        const json& t = j.at("training");
        cfg.training.learning_rate = t.at("learning_rate").get<double>();
        cfg.training.momentum = t.at("momentum").get<double>();
        cfg.training.batch_size = t.at("batch_size").get<int>();
        cfg.training.epochs = t.at("epochs").get<int>();
        cfg.training.seed = t.at("seed").get<std::uint64_t>();
        cfg.training.weight_init_scale = t.at("weight_init_scale").get<double>();
        cfg.samples_per_image = j.at("samples_per_image").get<int>();
        cfg.top_k = j.at("top_k").get<int>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        return cfg;
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("malformed configuration: {}", e.what()));
    }
}

std::string canonical_json(const ColorizerConfig& cfg) { return to_json(cfg).dump(); }

}  // namespace dcolor
