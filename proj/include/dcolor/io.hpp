#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dcolor/features.hpp"
#include "dcolor/image.hpp"
#include "dcolor/pipeline.hpp"

namespace dcolor {

/// 8- or 16-bit PNG as RGB in [0,1]. Gray PNGs are expanded to three planes.
ColorImage read_png_color(const std::filesystem::path& path);
/// Reads a PNG and returns its luminance (RGB files are converted).
GrayImage read_png_gray(const std::filesystem::path& path);
void write_png(const ColorImage& img, const std::filesystem::path& path);
void write_png(const GrayImage& img, const std::filesystem::path& path);

/// Single-channel 8-bit PNG whose values are category indices.
SemanticMap read_label_png(const std::filesystem::path& path, const std::vector<std::string>& categories);
void write_label_png(const std::vector<std::uint8_t>& labels, int width, int height,
                     const std::filesystem::path& path);

/// Probability map: "DCPM" | u32 width | u32 height | u32 N | f32 values, pixel-major, little-endian.
SemanticMap read_probability_map(const std::filesystem::path& path, const std::vector<std::string>& categories);
void write_probability_map(const SemanticMap& map, const std::filesystem::path& path);

/// Label PNG or probability map, chosen by extension (.png / .prob).
SemanticMap read_semantic(const std::filesystem::path& path, const std::vector<std::string>& categories);

/// One category name per line; blank lines ignored.
std::vector<std::string> read_categories(const std::filesystem::path& path);
void write_categories(const std::vector<std::string>& categories, const std::filesystem::path& path);

/// Dataset directory layout:
///   categories.txt
///   images/<id>.png
///   labels/<id>.png or labels/<id>.prob   (optional per image)
/// Entries are returned sorted by id.
std::vector<ReferencePair> load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::vector<ReferencePair>& dataset, const std::filesystem::path& dir);

}  // namespace dcolor
