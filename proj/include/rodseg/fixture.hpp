/**
 * @file fixture.hpp
 * @brief Deterministic synthetic frames with exact ground truth.
 *
 * Three kinds are generated:
 *   - two-tone: a flat image split at the middle column
 *   - blob-sequence: one dark disk moving over a light textured floor
 *   - textured-rodent-silhouette: body, paws and tail ellipses with
 *     distinct hues over a textured background
 *
 * Ground-truth masks use the class ids of eval.hpp (0 background, 1 paw,
 * 2 body, 3 tail).
 */

#pragma once

#include "rodseg/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rodseg {

enum class FixtureKind { TwoTone, BlobSequence, RodentSilhouette };

std::string_view fixtureKindName(FixtureKind kind);
FixtureKind parseFixtureKind(std::string_view name);

inline constexpr int kPawAreaMin = 100;
inline constexpr int kPawAreaMax = 3500;

struct FixtureParams {
    FixtureKind kind = FixtureKind::RodentSilhouette;
    uint64_t seed = 1;
    int width = 0;   // 0: kind default (64, 320, 2048)
    int height = 0;  // 0: kind default (64, 240, 700)
    int frames = 1;
    int noise = 4;   // per-channel uniform noise amplitude

    // blob-sequence
    int blobRadius = 10;
    int stepX = 5;           // constant velocity when maxStep == 0
    int stepY = 0;
    int maxStep = 0;         // > 0: random heading, integer steps of length <= maxStep
    int jumpFrame = -1;      // frame at which the blob jumps by jumpSize along +x (or -x near the edge)
    int jumpSize = 60;

    void validate() const;
};

struct FixtureFrame {
    RasterImage rgb;
    LabelMap gt;
    double cx = 0;  // blob-sequence: exact centroid of the blob pixels
    double cy = 0;
};

struct Fixture {
    FixtureKind kind = FixtureKind::TwoTone;
    std::vector<FixtureFrame> frames;
    std::vector<int64_t> pawAreas;  // rodent silhouette: target area of each paw
};

Fixture makeFixture(const FixtureParams& params);

/**
 * Writes frame_NNNN.png and gt_NNNN.png for every frame, plus truth.csv
 * (frame, cx, cy) for blob sequences. Creates `dir` if needed.
 */
void writeFixture(const Fixture& fixture, const std::filesystem::path& dir);

/// Zero-padded file name used for numbered frame sequences.
std::string numberedName(std::string_view prefix, int index, std::string_view ext = ".png");

} // namespace rodseg
