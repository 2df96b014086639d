/**
 * @file tracker.hpp
 * @brief Seeded single-landmark tracker over segmented regions.
 *
 * Each frame, the neighborhood of the previous position is segmented and
 * merged; every resulting region is a candidate scored by
 *
 *   +3  nearest centroid to the previous position
 *   +2  every candidate displaced along the previous velocity (dot > 0)
 *   +2  smallest hue difference
 *   +1  smallest saturation difference
 *   +1  smallest gray difference
 *
 * and the highest-scoring candidate becomes the new position. Tracking paws
 * is supported but experimental: their shape changes too quickly between
 * frames for the scoring to be reliable.
 */

#pragma once

#include "rodseg/image.hpp"
#include "rodseg/imgio.hpp"
#include "rodseg/merge.hpp"
#include "rodseg/superpixel.hpp"

#include <optional>
#include <vector>

namespace rodseg {

/// Seed lies too far from every region.
class SeedError : public Error {
public:
    using Error::Error;
};

struct TrackState {
    int frame = 0;
    double x = 0;
    double y = 0;
    double vx = 0;
    double vy = 0;
    double hue = 0;
    double sat = 0;
    double gray = 0;
    int64_t size = 0;
    int region = 0;
};

struct CandidateObject {
    int id = 0;
    double cx = 0;
    double cy = 0;
    double hue = 0;
    double sat = 0;
    double gray = 0;
    int64_t size = 0;
    int weight = 0;
};

/**
 * Describes every nonzero region of `mask` (ids are mask values) using the
 * hue, saturation and gray planes. Coordinates are shifted by (offsetX,
 * offsetY) so ROI-local regions report frame coordinates.
 */
std::vector<CandidateObject> describeRegions(const LabelMap& mask, const ChannelSet& channels, int offsetX = 0,
                                             int offsetY = 0);

/// Maximum distance from a background seed to an accepted region centroid.
inline constexpr double kSeedReach = 40.0;

TrackState initTrack(int seedX, int seedY, const LabelMap& mask, const std::vector<CandidateObject>& regions);

struct Roi {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
};

inline constexpr int kRoiSize = 80;

/// Window of side kRoiSize centered on the previous position, clipped to the frame.
Roi cropRoi(int frameWidth, int frameHeight, const TrackState& state, int roiSize = kRoiSize);

/**
 * Applies the five scoring clauses. A "minimum" bonus goes to every
 * candidate that attains the minimum, so exact ties score alike. Returns an
 * empty vector when there are no candidates (tracking lost).
 */
std::vector<CandidateObject> scoreCandidates(const TrackState& state, std::vector<CandidateObject> candidates);

/// Index of the winner: max weight, then nearest centroid, then lowest id.
std::optional<size_t> selectCandidate(const TrackState& state, const std::vector<CandidateObject>& scored);

struct TrackerParams {
    SlicParams slic;                       // segmentCount is per full frame
    ChannelMode channels = ChannelMode::Hue;
    int roiSize = kRoiSize;
    double minSizeRatio = 0.5;             // candidate gate relative to tracked size
    double maxSizeRatio = 2.0;
    double maxHueDelta = 18.0;
};

struct StepResult {
    TrackState state;
    bool lost = false;
    int weight = 0;
    int candidates = 0;
};

/**
 * Advances `state` by one frame using pre-segmented candidates (frame
 * coordinates). Candidates outside the gate (size ratio, hue delta) are
 * dropped; no survivor means tracking lost and the state is kept.
 */
StepResult stepTrack(const TrackState& state, const std::vector<CandidateObject>& candidates,
                     const TrackerParams& params = {});

/// Segments and merges the ROI of `frame`, returning frame-coordinate candidates.
std::vector<CandidateObject> roiCandidates(const RasterImage& frame, const TrackState& state,
                                           const TrackerParams& params, int frameWidth, int frameHeight);

/// Stateful wrapper: segment the ROI, score, select, update.
class Tracker {
public:
    Tracker(TrackState initial, TrackerParams params) : state_(initial), params_(std::move(params)) {}

    /// Seeds from a click on a full frame (segmented with the same parameters).
    static Tracker seeded(const RasterImage& firstFrame, int seedX, int seedY, const TrackerParams& params);

    StepResult step(const RasterImage& frame);

    const TrackState& state() const { return state_; }

private:
    TrackState state_;
    TrackerParams params_;
};

/// Segment + merge a whole frame into a region mask (ids from 1).
LabelMap segmentAndMerge(const RasterImage& rgb, const SlicParams& slic, ChannelMode channels);

} // namespace rodseg
