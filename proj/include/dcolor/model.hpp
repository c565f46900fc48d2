#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dcolor/clustering.hpp"
#include "dcolor/config.hpp"
#include "dcolor/mlp.hpp"

namespace dcolor {

/// A trained colorizer: the configuration it was built with, the category
/// list that fixes the semantic slice layout, the cluster hierarchy and one
/// network per cluster.
struct Model {
    static constexpr std::uint16_t kFormatVersion = 1;

    ColorizerConfig config;
    std::vector<std::string> categories;
    std::vector<Cluster> clusters;
    std::vector<Network> networks;

    std::size_t descriptor_dimension() const { return descriptor_size(categories.size()); }
    /// Throws FormatError if a cluster references a missing network or a
    /// network does not accept the descriptor layout.
    void validate() const;
    bool operator==(const Model&) const = default;
};

/// Binary layout (all integers little-endian):
///   "DCOLZ" | u16 version | four sections, each u64 byte length + payload:
///   config (canonical JSON), categories, clusters, networks.
/// Network parameters are binary32; cluster descriptors binary64.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace dcolor
