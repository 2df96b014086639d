#include "rodseg/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rodseg {

LabelMap segmentAndMerge(const RasterImage& rgb, const SlicParams& slic, ChannelMode channels) {
    const RasterImage plane = channelImage(rgb, channels);
    const LabelMap labels = slicSegment(plane, slic);
    const SuperpixelStats stats = computeStats(labels, plane);
    const AdjacencyGraph graph = buildAdjacency(labels);
    const MergedRegions merged = mergeRegions(stats, graph, intensityMax(channels));
    return regionsToMask(merged, labels);
}

std::vector<CandidateObject> describeRegions(const LabelMap& mask, const ChannelSet& channels, int offsetX,
                                             int offsetY) {
    if (mask.width != channels.hue.width() || mask.height != channels.hue.height()) {
        throw DimensionError("describeRegions: mask and channels differ in size");
    }
    struct Acc {
        int64_t n = 0, sx = 0, sy = 0, hue = 0, sat = 0, gray = 0;
    };
    std::map<int, Acc> acc;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const int id = mask.at(x, y);
            if (id <= 0) continue;
            Acc& a = acc[id];
            ++a.n;
            a.sx += x;
            a.sy += y;
            a.hue += channels.hue.at(x, y);
            a.sat += channels.sat.at(x, y);
            a.gray += channels.gray.at(x, y);
        }
    }
    std::vector<CandidateObject> out;
    out.reserve(acc.size());
    for (const auto& [id, a] : acc) {
        const double n = static_cast<double>(a.n);
        CandidateObject c;
        c.id = id;
        c.cx = a.sx / n + offsetX;
        c.cy = a.sy / n + offsetY;
        c.hue = a.hue / n;
        c.sat = a.sat / n;
        c.gray = a.gray / n;
        c.size = a.n;
        out.push_back(c);
    }
    return out;
}

TrackState initTrack(int seedX, int seedY, const LabelMap& mask, const std::vector<CandidateObject>& regions) {
    if (seedX < 0 || seedY < 0 || seedX >= mask.width || seedY >= mask.height) {
        throw SeedError("seed (" + std::to_string(seedX) + "," + std::to_string(seedY) + ") outside the frame");
    }
    const CandidateObject* chosen = nullptr;
    const int id = mask.at(seedX, seedY);
    if (id > 0) {
        for (const auto& r : regions) {
            if (r.id == id) chosen = &r;
        }
    }
    if (!chosen) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : regions) {
            const double d = std::hypot(r.cx - seedX, r.cy - seedY);
            if (d < best || (d == best && chosen && r.id < chosen->id)) {
                best = d;
                chosen = &r;
            }
        }
        if (!chosen || best > kSeedReach) {
            throw SeedError("no region within " + std::to_string(static_cast<int>(kSeedReach)) + " px of the seed");
        }
    }
    TrackState s;
    s.x = chosen->cx;
    s.y = chosen->cy;
    s.hue = chosen->hue;
    s.sat = chosen->sat;
    s.gray = chosen->gray;
    s.size = chosen->size;
    s.region = chosen->id;
    return s;
}

Roi cropRoi(int frameWidth, int frameHeight, const TrackState& state, int roiSize) {
    const int half = roiSize / 2;
    const int cx = static_cast<int>(std::lround(state.x));
    const int cy = static_cast<int>(std::lround(state.y));
    Roi roi;
    roi.x0 = std::clamp(cx - half, 0, frameWidth);
    roi.y0 = std::clamp(cy - half, 0, frameHeight);
    const int x1 = std::clamp(cx - half + roiSize, 0, frameWidth);
    const int y1 = std::clamp(cy - half + roiSize, 0, frameHeight);
    roi.width = x1 - roi.x0;
    roi.height = y1 - roi.y0;
    return roi;
}

namespace {

// Adds `bonus` to every candidate whose key equals the minimum.
template <class Key>
void rewardMinimum(std::vector<CandidateObject>& c, int bonus, Key key) {
    double best = key(c[0]);
    for (size_t i = 1; i < c.size(); ++i) best = std::min(best, key(c[i]));
    for (auto& x : c) {
        if (key(x) == best) x.weight += bonus;
    }
}

} // namespace

std::vector<CandidateObject> scoreCandidates(const TrackState& state, std::vector<CandidateObject> candidates) {
    if (candidates.empty()) return candidates;
    for (auto& c : candidates) c.weight = 0;

    rewardMinimum(candidates, 3, [&](const CandidateObject& c) { return std::hypot(c.cx - state.x, c.cy - state.y); });

    if (state.vx != 0 || state.vy != 0) {
        for (auto& c : candidates) {
            const double dot = (c.cx - state.x) * state.vx + (c.cy - state.y) * state.vy;
            if (dot > 0) c.weight += 2;
        }
    }

    rewardMinimum(candidates, 2, [&](const CandidateObject& c) { return std::abs(c.hue - state.hue); });
    rewardMinimum(candidates, 1, [&](const CandidateObject& c) { return std::abs(c.sat - state.sat); });
    rewardMinimum(candidates, 1, [&](const CandidateObject& c) { return std::abs(c.gray - state.gray); });
    return candidates;
}

std::optional<size_t> selectCandidate(const TrackState& state, const std::vector<CandidateObject>& scored) {
    if (scored.empty()) return std::nullopt;
    size_t best = 0;
    auto dist = [&](const CandidateObject& c) { return std::hypot(c.cx - state.x, c.cy - state.y); };
    for (size_t i = 1; i < scored.size(); ++i) {
        const auto& a = scored[i];
        const auto& b = scored[best];
        if (a.weight != b.weight) {
            if (a.weight > b.weight) best = i;
            continue;
        }
        const double da = dist(a);
        const double db = dist(b);
        if (da < db || (da == db && a.id < b.id)) best = i;
    }
    return best;
}

StepResult stepTrack(const TrackState& state, const std::vector<CandidateObject>& candidates,
                     const TrackerParams& params) {
    std::vector<CandidateObject> gated;
    for (const auto& c : candidates) {
        const double ratio = static_cast<double>(c.size) / static_cast<double>(std::max<int64_t>(state.size, 1));
        if (ratio < params.minSizeRatio || ratio > params.maxSizeRatio) continue;
        if (std::abs(c.hue - state.hue) > params.maxHueDelta) continue;
        gated.push_back(c);
    }

    StepResult result;
    result.state = state;
    result.state.frame = state.frame + 1;
    result.candidates = static_cast<int>(gated.size());
    const auto scored = scoreCandidates(state, std::move(gated));
    const auto pick = selectCandidate(state, scored);
    if (!pick) {
        result.lost = true;
        return result;
    }
    const CandidateObject& c = scored[*pick];
    TrackState& next = result.state;
    next.vx = c.cx - state.x;
    next.vy = c.cy - state.y;
    next.x = c.cx;
    next.y = c.cy;
    next.hue = c.hue;
    next.sat = c.sat;
    next.gray = c.gray;
    next.size = c.size;
    next.region = c.id;
    result.weight = c.weight;
    return result;
}

std::vector<CandidateObject> roiCandidates(const RasterImage& frame, const TrackState& state,
                                           const TrackerParams& params, int frameWidth, int frameHeight) {
    const Roi roi = cropRoi(frameWidth, frameHeight, state, params.roiSize);
    if (roi.width <= 0 || roi.height <= 0) return {};
    const RasterImage window = cropImage(frame, roi.x0, roi.y0, roi.width, roi.height);

    SlicParams slic = params.slic;
    const double roiArea = static_cast<double>(roi.width) * roi.height;
    const double frameArea = static_cast<double>(frameWidth) * frameHeight;
    slic.segmentCount = std::clamp(static_cast<int>(std::lround(slic.segmentCount * roiArea / frameArea)), 1,
                                   roi.width * roi.height);

    const LabelMap mask = segmentAndMerge(window, slic, params.channels);
    return describeRegions(mask, makeChannelSet(window), roi.x0, roi.y0);
}

Tracker Tracker::seeded(const RasterImage& firstFrame, int seedX, int seedY, const TrackerParams& params) {
    const LabelMap mask = segmentAndMerge(firstFrame, params.slic, params.channels);
    const auto regions = describeRegions(mask, makeChannelSet(firstFrame));
    return Tracker(initTrack(seedX, seedY, mask, regions), params);
}

StepResult Tracker::step(const RasterImage& frame) {
    const auto candidates = roiCandidates(frame, state_, params_, frame.width(), frame.height());
    StepResult r = stepTrack(state_, candidates, params_);
    state_ = r.state;
    return r;
}

} // namespace rodseg
