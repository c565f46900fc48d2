#include "dcolor/model.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "dcolor/error.hpp"

namespace dcolor {

namespace {

constexpr std::string_view kMagic = "DCOLZ";

void write_vector(detail::ByteWriter& w, std::span<const double> values) {
    w.u32(static_cast<std::uint32_t>(values.size()));
    for (double v : values) {
        w.f64(v);
    }
}

std::vector<double> read_vector(detail::ByteReader& r) {
    const std::uint32_t n = r.u32();
    if (n > r.remaining() / sizeof(double)) {
        throw FormatError("vector length exceeds section size");
    }
    std::vector<double> v(n);
    for (auto& x : v) {
        x = r.f64();
    }
    return v;
}

}  // namespace

void Model::validate() const {
    if (categories.empty()) {
        throw FormatError("model has no categories");
    }
    if (clusters.empty()) {
        throw FormatError("model has no clusters");
    }
    for (const Cluster& c : clusters) {
        if (c.network >= networks.size()) {
            throw FormatError(fmt::format("cluster {} references missing network {}", c.id, c.network));
        }
        if (c.center.values.size() != kGistSize) {
            throw FormatError(fmt::format("cluster {} has a {}-value gist center", c.id, c.center.values.size()));
        }
        if (c.histogram.bins.size() != categories.size()) {
            throw FormatError(fmt::format("cluster {} histogram has {} bins for {} categories", c.id,
                                          c.histogram.bins.size(), categories.size()));
        }
    }
    for (std::size_t i = 0; i < networks.size(); ++i) {
        if (networks[i].input_size() != descriptor_dimension() || networks[i].output_size() != 2) {
            throw FormatError(fmt::format("network {} maps {} -> {}, expected {} -> 2", i,
                                          networks[i].input_size(), networks[i].output_size(),
                                          descriptor_dimension()));
        }
    }
}

std::vector<std::uint8_t> serialize_model(const Model& model) {
    detail::ByteWriter out;
    out.text(kMagic);
    out.u16(Model::kFormatVersion);

    detail::ByteWriter config;
    config.text(canonical_json(model.config));
    out.section(config);

    detail::ByteWriter cats;
    cats.u32(static_cast<std::uint32_t>(model.categories.size()));
    for (const auto& c : model.categories) {
        cats.string(c);
    }
    out.section(cats);

    detail::ByteWriter clusters;
    clusters.u32(static_cast<std::uint32_t>(model.clusters.size()));
    for (const Cluster& c : model.clusters) {
        clusters.u64(c.id);
        clusters.scalar<std::int32_t>(c.layer);
        clusters.u64(c.network);
        write_vector(clusters, c.center.values);
        write_vector(clusters, c.histogram.bins);
        clusters.u32(static_cast<std::uint32_t>(c.members.size()));
        for (const auto& m : c.members) {
            clusters.string(m);
        }
    }
    out.section(clusters);

    detail::ByteWriter nets;
    nets.u32(static_cast<std::uint32_t>(model.networks.size()));
    for (const Network& n : model.networks) {
        nets.u32(static_cast<std::uint32_t>(n.layer_sizes().size()));
        for (int s : n.layer_sizes()) {
            nets.u32(static_cast<std::uint32_t>(s));
        }
        for (std::size_t l = 0; l < n.depth(); ++l) {
            const auto& w = n.weights(l);
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                for (Eigen::Index c = 0; c < w.cols(); ++c) {
                    nets.f32(static_cast<float>(w(r, c)));
                }
            }
            const auto& b = n.biases(l);
            for (Eigen::Index r = 0; r < b.size(); ++r) {
                nets.f32(static_cast<float>(b(r)));
            }
        }
    }
    out.section(nets);
    return out.release();
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes);
    const auto magic = in.take(kMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
        throw FormatError("not a model file (bad magic)");
    }
    const std::uint16_t version = in.u16();
    if (version != Model::kFormatVersion) {
        throw FormatError(fmt::format("unsupported model format version {} (expected {})", version,
                                      Model::kFormatVersion));
    }

    Model model;
    {
        auto section = in.section();
        const auto raw = section.take(section.remaining());
        const std::string text(reinterpret_cast<const char*>(raw.data()), raw.size());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(fmt::format("model config is not valid JSON: {}", e.what()));
        }
        model.config = config_from_json(j);
    }
    {
        auto section = in.section();
        const std::uint32_t n = section.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            model.categories.push_back(section.string());
        }
    }
    {
        auto section = in.section();
        const std::uint32_t n = section.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            Cluster c;
            c.id = section.u64();
            c.layer = section.scalar<std::int32_t>();
            c.network = section.u64();
            c.center.values = read_vector(section);
            c.histogram.bins = read_vector(section);
            const std::uint32_t members = section.u32();
            for (std::uint32_t m = 0; m < members; ++m) {
                c.members.push_back(section.string());
            }
            model.clusters.push_back(std::move(c));
        }
    }
    {
        auto section = in.section();
        const std::uint32_t n = section.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::uint32_t layers = section.u32();
            if (layers < 2 || layers > 64) {
                throw FormatError(fmt::format("network {} has {} layers", i, layers));
            }
            std::vector<int> sizes(layers);
            for (auto& s : sizes) {
                const std::uint32_t v = section.u32();
                if (v == 0 || v > (1u << 20)) {
                    throw FormatError(fmt::format("network {} has invalid layer size {}", i, v));
                }
                s = static_cast<int>(v);
            }
            Network net(sizes);
            for (std::size_t l = 0; l < net.depth(); ++l) {
                auto& w = net.weights(l);
                for (Eigen::Index r = 0; r < w.rows(); ++r) {
                    for (Eigen::Index c = 0; c < w.cols(); ++c) {
                        w(r, c) = static_cast<double>(section.f32());
                    }
                }
                auto& b = net.biases(l);
                for (Eigen::Index r = 0; r < b.size(); ++r) {
                    b(r) = static_cast<double>(section.f32());
                }
            }
            model.networks.push_back(std::move(net));
        }
    }
    if (!in.done()) {
        throw FormatError("trailing bytes after model sections");
    }
    model.validate();
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError(fmt::format("failed writing {}", path.string()));
    }
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open model file {}", path.string()));
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace dcolor
