/**
 * @file features.hpp
 * @brief 28-value region descriptor: four channel means plus six Haralick
 *        statistics of the gray-level co-occurrence matrix at four angles.
 */

#pragma once

#include "rodseg/image.hpp"
#include "rodseg/imgio.hpp"

#include <array>
#include <vector>

namespace rodseg {

inline constexpr int kFeatureCount = 28;
inline constexpr int kDefaultGlcmLevels = 32;

using FeatureVector = std::array<double, kFeatureCount>;

/// Means of gray, green, saturation and hue (in that order) over the mask.
std::array<double, 4> colorMeans(const BinaryMask& region, const RasterImage& gray, const RasterImage& green,
                                 const RasterImage& sat, const RasterImage& hue);

enum class GlcmAngle { Deg0, Deg45, Deg90, Deg135 };

inline constexpr std::array<GlcmAngle, 4> kGlcmAngles = {GlcmAngle::Deg0, GlcmAngle::Deg45, GlcmAngle::Deg90,
                                                         GlcmAngle::Deg135};

/// Unit displacement (dx, dy) for an angle; y grows downwards.
std::pair<int, int> glcmOffset(GlcmAngle angle);

struct GlcmMatrix {
    int levels = 0;
    std::vector<double> p;   // levels x levels, row-major
    bool degenerate = false; // no valid pair inside the region

    double at(int i, int j) const { return p[static_cast<size_t>(i) * levels + j]; }
};

/// Uniform quantization of an 8-bit sample into `levels` bins.
int quantize(uint8_t value, int levels);

/**
 * Symmetric, normalized co-occurrence matrix at distance 1. Both pixels of a
 * pair must lie inside `region`; only the region's bounding box is scanned.
 */
GlcmMatrix glcm(const RasterImage& gray, const BinaryMask& region, GlcmAngle angle, int levels = kDefaultGlcmLevels);

struct HaralickFeatures {
    double contrast = 0;
    double dissimilarity = 0;
    double homogeneity = 0;
    double asm_ = 0;
    double energy = 0;
    double correlation = 0;
    bool degenerate = false;

    std::array<double, 6> values() const {
        return {contrast, dissimilarity, homogeneity, asm_, energy, correlation};
    }
};

HaralickFeatures haralick(const GlcmMatrix& m);

/// [color means, haralick@0, @45, @90, @135]; the region must be non-empty.
FeatureVector featureVector(const BinaryMask& region, const ChannelSet& channels, int levels = kDefaultGlcmLevels);

// =============================================================================
// t-SNE
// =============================================================================

struct TsneParams {
    double perplexity = 0;      // <= 0 selects min(30, (N - 1) / 3)
    int iterations = 1000;
    double learningRate = 200.0;
    double exaggeration = 12.0;
    int exaggerationIterations = 250;
    double initialMomentum = 0.5;
    double finalMomentum = 0.8;
    double initScale = 1e-4;
    unsigned long long seed = 0;
};

struct TsneResult {
    std::vector<std::array<double, 2>> embedding;
    double initialKl = 0;
    double finalKl = 0;
};

/// Zero mean, unit variance per column; constant columns become 0.
std::vector<std::vector<double>> standardize(const std::vector<std::vector<double>>& rows);

/**
 * Symmetric input affinities P (row-major N x N, summing to 1). Each row's
 * Gaussian bandwidth is bisected to match the perplexity.
 */
std::vector<double> tsneAffinities(const std::vector<std::vector<double>>& rows, double perplexity);

/// KL(P || Q) for the Student-t output affinities of embedding y.
double tsneKl(const std::vector<double>& p, const std::vector<std::array<double, 2>>& y);

/// Gradient of tsneKl with respect to every embedded coordinate.
std::vector<std::array<double, 2>> tsneGradient(const std::vector<double>& p,
                                                const std::vector<std::array<double, 2>>& y);

/// Exact t-SNE into two dimensions. Inputs are standardized first.
TsneResult tsne(const std::vector<std::vector<double>>& rows, const TsneParams& params);

} // namespace rodseg
