#include "dcolor/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>

#include <fmt/format.h>
#include <png.h>
#include <spdlog/spdlog.h>

#include "binary_io.hpp"
#include "dcolor/color.hpp"
#include "dcolor/error.hpp"

namespace fs = std::filesystem;

namespace dcolor {

namespace {

constexpr std::string_view kProbMagic = "DCPM";

struct PngImage {
    png_image img{};
    PngImage() {
        img.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&img); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open {}", path.string()));
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads the header and returns the decoded buffer in `format`.
std::vector<std::uint8_t> decode_png(const fs::path& path, png_uint_32 format, png_uint_32* source_format,
                                     int* width, int* height) {
    PngImage png;
    if (png_image_begin_read_from_file(&png.img, path.c_str()) == 0) {
        throw IoError(fmt::format("cannot read PNG {}: {}", path.string(), png.img.message));
    }
    *source_format = png.img.format;
    png.img.format = format;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png.img));
    if (png_image_finish_read(&png.img, nullptr, buf.data(), 0, nullptr) == 0) {
        throw IoError(fmt::format("cannot decode PNG {}: {}", path.string(), png.img.message));
    }
    *width = static_cast<int>(png.img.width);
    *height = static_cast<int>(png.img.height);
    return buf;
}

void encode_png(const fs::path& path, png_uint_32 format, int width, int height,
                const std::vector<std::uint8_t>& buf) {
    PngImage png;
    png.img.width = static_cast<png_uint_32>(width);
    png.img.height = static_cast<png_uint_32>(height);
    png.img.format = format;
    if (png_image_write_to_file(&png.img, path.c_str(), 0, buf.data(), 0, nullptr) == 0) {
        throw IoError(fmt::format("cannot write PNG {}: {}", path.string(), png.img.message));
    }
}

png_uint_32 probe_format(const fs::path& path) {
    PngImage png;
    if (png_image_begin_read_from_file(&png.img, path.c_str()) == 0) {
        throw IoError(fmt::format("cannot read PNG {}: {}", path.string(), png.img.message));
    }
    return png.img.format;
}

bool is_one_hot(const SemanticMap& map, std::vector<std::uint8_t>& labels) {
    const std::size_t n = map.category_count();
    if (n > 256) {
        return false;
    }
    labels.clear();
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            const auto p = map.at(x, y);
            std::size_t hot = n;
            for (std::size_t c = 0; c < n; ++c) {
                if (p[c] == 1.0 && hot == n) {
                    hot = c;
                } else if (p[c] != 0.0) {
                    return false;
                }
            }
            if (hot == n) {
                return false;
            }
            labels.push_back(static_cast<std::uint8_t>(hot));
        }
    }
    return true;
}

}  // namespace

ColorImage read_png_color(const fs::path& path) {
    png_uint_32 source = 0;
    int w = 0;
    int h = 0;
    const auto buf = decode_png(path, PNG_FORMAT_RGB, &source, &w, &h);
    if ((source & PNG_FORMAT_FLAG_ALPHA) != 0) {
        spdlog::warn("{}: alpha channel ignored", path.string());
    }
    ColorImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x));
            img.r(x, y) = buf[i] / 255.0;
            img.g(x, y) = buf[i + 1] / 255.0;
            img.b(x, y) = buf[i + 2] / 255.0;
        }
    }
    return img;
}

GrayImage read_png_gray(const fs::path& path) {
    if ((probe_format(path) & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_COLORMAP)) != 0) {
        return to_gray(read_png_color(path));
    }
    png_uint_32 source = 0;
    int w = 0;
    int h = 0;
    const auto buf = decode_png(path, PNG_FORMAT_GRAY, &source, &w, &h);
    GrayImage img(w, h);
    auto v = img.y.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = buf[i] / 255.0;
    }
    return img;
}

void write_png(const ColorImage& img, const fs::path& path) {
    const int w = img.width();
    const int h = img.height();
    std::vector<std::uint8_t> buf(3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x));
            buf[i] = quantize(img.r(x, y));
            buf[i + 1] = quantize(img.g(x, y));
            buf[i + 2] = quantize(img.b(x, y));
        }
    }
    encode_png(path, PNG_FORMAT_RGB, w, h, buf);
}

void write_png(const GrayImage& img, const fs::path& path) {
    std::vector<std::uint8_t> buf;
    buf.reserve(img.y.size());
    for (double v : img.y.values()) {
        buf.push_back(quantize(v));
    }
    encode_png(path, PNG_FORMAT_GRAY, img.width(), img.height(), buf);
}

SemanticMap read_label_png(const fs::path& path, const std::vector<std::string>& categories) {
    png_uint_32 source = probe_format(path);
    int w = 0;
    int h = 0;
    // Palette or RGB label images would be silently re-quantized; insist on raw indices.
    if ((source & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_COLORMAP | PNG_FORMAT_FLAG_ALPHA |
                   PNG_FORMAT_FLAG_LINEAR)) != 0) {
        throw FormatError(fmt::format("label image {} must be a single-channel 8-bit PNG", path.string()));
    }
    const auto labels = decode_png(path, PNG_FORMAT_GRAY, &source, &w, &h);
    try {
        return SemanticMap::from_labels(w, h, labels, categories);
    } catch (const InvalidArgument& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_label_png(const std::vector<std::uint8_t>& labels, int width, int height, const fs::path& path) {
    if (labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatch(fmt::format("{} labels for a {}x{} image", labels.size(), width, height));
    }
    encode_png(path, PNG_FORMAT_GRAY, width, height, labels);
}

SemanticMap read_probability_map(const fs::path& path, const std::vector<std::string>& categories) {
    const auto bytes = read_file(path);
    detail::ByteReader in(bytes);
    const auto magic = in.take(kProbMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kProbMagic.begin())) {
        throw FormatError(fmt::format("{} is not a probability map (bad magic)", path.string()));
    }
    const std::uint32_t w = in.u32();
    const std::uint32_t h = in.u32();
    const std::uint32_t n = in.u32();
    if (n != categories.size()) {
        throw DimensionMismatch(fmt::format("{} has {} categories, expected {}", path.string(), n,
                                            categories.size()));
    }
    if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
        throw FormatError(fmt::format("{} has invalid size {}x{}", path.string(), w, h));
    }
    const std::size_t count = static_cast<std::size_t>(w) * h * n;
    if (in.remaining() != count * sizeof(float)) {
        throw FormatError(fmt::format("{} holds {} bytes of data, expected {}", path.string(),
                                      in.remaining(), count * sizeof(float)));
    }
    SemanticMap map(static_cast<int>(w), static_cast<int>(h), categories);
    for (double& v : map.values()) {
        v = static_cast<double>(in.f32());
    }
    map.validate(1e-4);
    return map;
}

void write_probability_map(const SemanticMap& map, const fs::path& path) {
    detail::ByteWriter out;
    out.text(kProbMagic);
    out.u32(static_cast<std::uint32_t>(map.width()));
    out.u32(static_cast<std::uint32_t>(map.height()));
    out.u32(static_cast<std::uint32_t>(map.category_count()));
    for (double v : map.values()) {
        out.f32(static_cast<float>(v));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    const auto& data = out.data();
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) {
        throw IoError(fmt::format("failed writing {}", path.string()));
    }
}

SemanticMap read_semantic(const fs::path& path, const std::vector<std::string>& categories) {
    const auto ext = path.extension().string();
    if (ext == ".png") {
        return read_label_png(path, categories);
    }
    if (ext == ".prob") {
        return read_probability_map(path, categories);
    }
    throw InvalidArgument(fmt::format("unknown semantic map type '{}' ({})", ext, path.string()));
}

std::vector<std::string> read_categories(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("cannot open category list {}", path.string()));
    }
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos) {
            continue;
        }
        out.push_back(line.substr(start));
    }
    if (out.empty()) {
        throw FormatError(fmt::format("category list {} is empty", path.string()));
    }
    return out;
}

void write_categories(const std::vector<std::string>& categories, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    for (const auto& c : categories) {
        out << c << '\n';
    }
}

std::vector<ReferencePair> load_dataset(const fs::path& dir) {
    const fs::path images = dir / "images";
    const fs::path labels = dir / "labels";
    if (!fs::is_directory(images)) {
        throw IoError(fmt::format("dataset {} has no images/ directory", dir.string()));
    }
    const fs::path cats_path = dir / "categories.txt";
    if (!fs::exists(cats_path)) {
        throw IoError(fmt::format("dataset {} is missing its category list {}", dir.string(), cats_path.string()));
    }
    const auto categories = read_categories(cats_path);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(images)) {
        if (e.is_regular_file() && e.path().extension() == ".png") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<ReferencePair> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        const std::string id = f.stem().string();
        std::optional<SemanticMap> sem;
        const fs::path png_label = labels / (id + ".png");
        const fs::path prob_label = labels / (id + ".prob");
        if (fs::exists(png_label)) {
            sem = read_label_png(png_label, categories);
        } else if (fs::exists(prob_label)) {
            sem = read_probability_map(prob_label, categories);
        }
        out.push_back(make_reference(id, read_png_color(f), std::move(sem)));
    }
    return out;
}

void save_dataset(const std::vector<ReferencePair>& dataset, const fs::path& dir) {
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "labels");
    const std::vector<std::string>* categories = nullptr;
    for (const auto& ref : dataset) {
        if (ref.semantic) {
            if (categories == nullptr) {
                categories = &ref.semantic->categories();
            } else if (*categories != ref.semantic->categories()) {
                throw InvalidArgument(fmt::format("image '{}' uses a different category list", ref.id));
            }
        }
    }
    if (categories == nullptr) {
        throw InvalidArgument("dataset has no semantic maps, so no category list can be written");
    }
    write_categories(*categories, dir / "categories.txt");
    std::vector<std::uint8_t> labels;
    for (const auto& ref : dataset) {
        write_png(ref.color, dir / "images" / (ref.id + ".png"));
        if (!ref.semantic) {
            continue;
        }
        if (is_one_hot(*ref.semantic, labels)) {
            write_label_png(labels, ref.semantic->width(), ref.semantic->height(),
                            dir / "labels" / (ref.id + ".png"));
        } else {
            write_probability_map(*ref.semantic, dir / "labels" / (ref.id + ".prob"));
        }
    }
}

}  // namespace dcolor
