/**
 * @file merge.hpp
 * @brief Superpixel statistics and intensity-based region merging.
 *
 * Two adjacent superpixels k and j are linked when
 *
 *     |I_k - I_j| < relativeThreshold * I_j   and   |I_k - I_j| < M,
 *     M = absoluteFraction * i_max,
 *
 * evaluated in either direction. Linked superpixels form groups; groups are
 * re-evaluated on their pixel-weighted mean intensities until no adjacent
 * pair of groups links any more.
 */

#pragma once

#include "rodseg/image.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace rodseg {

struct SuperpixelStat {
    double cx = 0;
    double cy = 0;
    double intensity = 0;   // mean over member pixels
    int64_t size = 0;
    int64_t intensitySum = 0;  // exact sum of per-pixel samples (x3 for RGB)
    int divisor = 1;           // samples per pixel contributing to the sum
};

struct SuperpixelStats {
    int width = 0;
    int height = 0;
    std::vector<SuperpixelStat> items;
};

/**
 * Centroid and mean intensity per label. For RGB8 the per-pixel intensity is
 * the mean of R, G and B. Every label in [0, clusterCount) must occur.
 */
SuperpixelStats computeStats(const LabelMap& labels, const RasterImage& channel);

/// Symmetric, irreflexive neighbor sets under 4-connectivity.
struct AdjacencyGraph {
    std::vector<std::set<int>> neighbors;

    size_t size() const { return neighbors.size(); }
    bool adjacent(int a, int b) const { return neighbors[a].count(b) > 0; }
};

AdjacencyGraph buildAdjacency(const LabelMap& labels);

struct MergeParams {
    double relativeThreshold = 0.10;
    double absoluteFraction = 0.05;
};

/// True when the link condition holds for the ordered pair (k, j).
bool linkCondition(double ik, double ij, double relativeThreshold, double m);

struct Region {
    std::vector<int> members;  // ascending superpixel ids
    int64_t size = 0;
    double intensity = 0;
    double cx = 0;
    double cy = 0;
    int minX = 0;
    int minY = 0;
    int maxX = 0;
    int maxY = 0;
};

struct MergedRegions {
    std::vector<Region> groups;     // ordered by lowest member id
    std::vector<int> groupOf;       // superpixel id -> group index
    int rounds = 0;                 // merge rounds until the fixpoint
};

MergedRegions mergeRegions(const SuperpixelStats& stats, const AdjacencyGraph& graph, double iMax,
                           const MergeParams& params = {});

/// Bounding boxes are filled from the label map; call after mergeRegions.
void fillBoundingBoxes(MergedRegions& regions, const LabelMap& labels);

/// Per-pixel group id, contiguous from 1.
LabelMap regionsToMask(const MergedRegions& regions, const LabelMap& labels);

/**
 * Group-level statistics and adjacency, so a merge result can be fed back
 * into mergeRegions (each group becomes one item).
 */
SuperpixelStats groupStats(const MergedRegions& regions, const SuperpixelStats& stats);
AdjacencyGraph groupAdjacency(const MergedRegions& regions, const AdjacencyGraph& graph);

} // namespace rodseg
