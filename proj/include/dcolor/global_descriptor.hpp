#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dcolor/features.hpp"
#include "dcolor/image.hpp"

namespace dcolor {

inline constexpr int kGistSide = 128;
inline constexpr int kGistScales = 4;
inline constexpr int kGistOrientations = 8;
inline constexpr int kGistGrid = 4;
inline constexpr std::size_t kGistSize = kGistScales * kGistOrientations * kGistGrid * kGistGrid;
inline constexpr int kGistMinSide = 16;

struct GistDescriptor {
    std::vector<double> values;  // scale-major, orientation-minor, cell row-major
    bool operator==(const GistDescriptor&) const = default;
};

struct SemanticHistogram {
    std::vector<double> bins;
    bool operator==(const SemanticHistogram&) const = default;
};

/// Bilinear resampling with pixel-center alignment and replicated borders.
Plane resize_bilinear(const Plane& src, int width, int height);

/// Frequency response of the Gabor filter (scale, orientation) on an n x n DFT
/// grid, in FFTW's natural order. The DC term is forced to zero.
std::vector<double> gabor_transfer(int n, int scale, int orientation);

/// |IDFT(DFT(square) * transfer)| for a square plane. Exposed for testing.
Plane filter_magnitude(const Plane& square, std::span<const double> transfer);

GistDescriptor compute_gist(const GrayImage& img);

/// bin[c] = mean over pixels of P(c).
SemanticHistogram semantic_histogram(const SemanticMap& map);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Cosine similarity; 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Among the k candidates nearest by gist distance, the index with the largest
/// histogram cosine similarity. Ties at either stage go to the lower index.
std::size_t select_cluster(const GistDescriptor& gist, const SemanticHistogram& hist,
                           std::span<const GistDescriptor> centers,
                           std::span<const SemanticHistogram> histograms, std::size_t k);

/// The top-k candidate indices by gist distance (stage one of select_cluster).
std::vector<std::size_t> nearest_by_gist(const GistDescriptor& gist,
                                         std::span<const GistDescriptor> centers, std::size_t k);

}  // namespace dcolor
