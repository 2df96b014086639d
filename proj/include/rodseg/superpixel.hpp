/**
 * @file superpixel.hpp
 * @brief SLIC, graph-based (Felzenszwalb-Huttenlocher) and quick shift
 *        over-segmentation.
 *
 * All three segmenters accept RGB8 or any single-channel layout and return a
 * LabelMap whose ids are contiguous from 0 and assigned in scan order of
 * first appearance.
 */

#pragma once

#include "rodseg/image.hpp"

#include <vector>

namespace rodseg {

// =============================================================================
// SLIC
// =============================================================================

struct SlicParams {
    int segmentCount = 1500;
    double compactness = 10.0;
    int iterations = 10;
    bool enforceConnectivity = true;

    void validate() const;
};

struct SlicCenter {
    double x = 0;
    double y = 0;
    double color[3] = {0, 0, 0};
};

/**
 * Seed layout shared by the clustering loop: grid dimensions, grid step S and
 * the gradient-adjusted centers.
 */
struct SlicGrid {
    int columns = 0;
    int rows = 0;
    double step = 0;       // S = sqrt(pixels / N)
    double cellArea = 0;   // pixels / (columns * rows)
    std::vector<SlicCenter> centers;
};

/// Raw clustering output before connectivity enforcement.
struct SlicClustering {
    SlicGrid grid;
    LabelMap assignment;
    std::vector<SlicCenter> centers;
    /// Sum over pixels of the squared joint distance after each assignment pass.
    std::vector<double> energy;
    int iterationsRun = 0;
    bool converged = false;
};

/// Grid dimensions chosen for a requested segment count.
SlicGrid slicGrid(const RasterImage& img, int segmentCount);

/// Per-pixel seeding gradient: sum over channels of central differences.
std::vector<double> slicGradient(const RasterImage& img);

/// Localized k-means only; labels are cluster indices, not yet relabeled.
SlicClustering slicCluster(const RasterImage& img, const SlicParams& params);

/**
 * Splits every label into its 4-connected components and folds fragments
 * smaller than `minSize` into the largest adjacent component whose merged
 * size stays within `maxSize`. Returns contiguous scan-order ids.
 */
LabelMap enforceConnectivity(const LabelMap& labels, double minSize, double maxSize);

LabelMap slicSegment(const RasterImage& img, const SlicParams& params);

// =============================================================================
// Graph-based
// =============================================================================

struct GbParams {
    double scale = 300.0;  // k
    double sigma = 0.8;
    int minSize = 50;

    void validate() const;
};

LabelMap gbSegment(const RasterImage& img, const GbParams& params);

/// Separable Gaussian blur of every channel (float planes, channel-major).
std::vector<std::vector<float>> gaussianSmooth(const RasterImage& img, double sigma);

// =============================================================================
// Quick shift
// =============================================================================

struct QsParams {
    double kernelSize = 3.0;    // Gaussian sigma of the density estimate
    double maxDistance = 8.0;   // link radius in the joint space
    double ratio = 0.5;         // color weight relative to space

    void validate() const;
};

struct QuickShiftForest {
    std::vector<double> density;
    std::vector<int> parent;     // parent[i] == i marks a mode
};

/// Density estimate and parent links; labels are read off the forest roots.
QuickShiftForest quickShiftForest(const RasterImage& img, const QsParams& params);

LabelMap qsSegment(const RasterImage& img, const QsParams& params);

/// Labels from a parent forest: each pixel takes the scan-order id of its root.
LabelMap labelsFromForest(int width, int height, const std::vector<int>& parent);

} // namespace rodseg
