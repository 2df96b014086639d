// Slow reference implementations used to cross-check the library.
#pragma once

#include "rodseg/eval.hpp"
#include "rodseg/features.hpp"
#include "rodseg/image.hpp"
#include "rodseg/merge.hpp"
#include "rodseg/superpixel.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using rodseg::BinaryMask;
using rodseg::LabelMap;
using rodseg::RasterImage;

// Each missing color is the average of the same-color samples in the 3x3
// window that fall inside the image, rounded half up.
RasterImage debayer(const RasterImage& raw);

// Lloyd iterations in (x, y, color). Every pixel scans every center and keeps
// the nearest one lying within `step` on both axes, or the nearest overall
// when none does. Stops when the assignment repeats.
struct KmeansResult {
    std::vector<int32_t> assignment;
    int iterations = 0;
    bool converged = false;
};
KmeansResult kmeans(const RasterImage& img, std::vector<rodseg::SlicCenter> centers, double spatialWeight,
                    double step, int maxIterations);

// Quick shift with a full scan over all pixels for both density and parent.
std::vector<int> quickShiftParents(const RasterImage& img, const rodseg::QsParams& params);

// Neighbor pairs collected from every horizontally or vertically touching pixel pair.
std::set<std::pair<int, int>> adjacentPairs(const LabelMap& labels);

// Merge by repeated full rescans; returns the superpixel -> group partition
// with groups numbered by their lowest member.
std::vector<int> mergePartition(const LabelMap& labels, const RasterImage& channel, double iMax);

// Haralick statistics computed directly from the list of co-occurring pairs.
std::array<double, 6> haralickFromPairs(const RasterImage& gray, const BinaryMask& mask, int dx, int dy, int levels,
                                        bool& degenerate);

rodseg::ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt);

// Deterministic random helpers for generated instances.
RasterImage randomBlocks(std::mt19937_64& rng, int w, int h, int blocks, int noise, rodseg::Layout layout);
BinaryMask randomMask(std::mt19937_64& rng, int w, int h, double density);

// Two well-separated Gaussian clouds in `dim` dimensions.
std::vector<std::vector<double>> twoClusters(std::mt19937_64& rng, int perCluster, int dim, double separation);

// Central-difference gradient of tsneKl.
std::vector<std::array<double, 2>> numericGradient(const std::vector<double>& p, std::vector<std::array<double, 2>> y,
                                                   double h);

} // namespace oracle
