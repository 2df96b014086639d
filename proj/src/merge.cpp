#include "rodseg/merge.hpp"

#include "rodseg/imgio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rodseg {

SuperpixelStats computeStats(const LabelMap& labels, const RasterImage& channel) {
    if (labels.width != channel.width() || labels.height != channel.height()) {
        throw DimensionError("computeStats: label map and channel differ in size");
    }
    const int nc = channel.channels();
    SuperpixelStats stats;
    stats.width = labels.width;
    stats.height = labels.height;
    stats.items.resize(std::max(labels.clusterCount, 0));

    std::vector<int64_t> sumX(stats.items.size(), 0);
    std::vector<int64_t> sumY(stats.items.size(), 0);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const int32_t id = labels.at(x, y);
            if (id < 0 || id >= labels.clusterCount) {
                throw Error("computeStats: label " + std::to_string(id) + " outside [0, clusterCount)");
            }
            auto& s = stats.items[id];
            ++s.size;
            sumX[id] += x;
            sumY[id] += y;
            for (int c = 0; c < nc; ++c) s.intensitySum += channel.at(x, y, c);
        }
    }
    for (size_t i = 0; i < stats.items.size(); ++i) {
        auto& s = stats.items[i];
        if (s.size == 0) throw Error("computeStats: label " + std::to_string(i) + " has no pixels");
        s.divisor = nc;
        s.cx = static_cast<double>(sumX[i]) / s.size;
        s.cy = static_cast<double>(sumY[i]) / s.size;
        s.intensity = static_cast<double>(s.intensitySum) / (static_cast<double>(s.size) * nc);
    }
    return stats;
}

AdjacencyGraph buildAdjacency(const LabelMap& labels) {
    AdjacencyGraph g;
    g.neighbors.resize(std::max(labels.clusterCount, 0));
    const int w = labels.width;
    const int h = labels.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = labels.at(x, y);
            if (x + 1 < w) {
                const int b = labels.at(x + 1, y);
                if (a != b) {
                    g.neighbors[a].insert(b);
                    g.neighbors[b].insert(a);
                }
            }
            if (y + 1 < h) {
                const int b = labels.at(x, y + 1);
                if (a != b) {
                    g.neighbors[a].insert(b);
                    g.neighbors[b].insert(a);
                }
            }
        }
    }
    return g;
}

bool linkCondition(double ik, double ij, double relativeThreshold, double m) {
    const double diff = std::abs(ik - ij);
    return diff < relativeThreshold * ij && diff < m;
}

namespace {

int findRoot(std::vector<int>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

} // namespace

MergedRegions mergeRegions(const SuperpixelStats& stats, const AdjacencyGraph& graph, double iMax,
                           const MergeParams& params) {
    const int n = static_cast<int>(stats.items.size());
    if (n == 0) throw Error("mergeRegions: no superpixels");
    if (static_cast<int>(graph.size()) != n) throw Error("mergeRegions: graph and stats cover different id ranges");
    const double m = params.absoluteFraction * iMax;

    // Union-find over superpixels; the root always carries the smallest member id.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<int64_t> groupSize(n);
    std::vector<int64_t> groupSum(n);
    for (int i = 0; i < n; ++i) {
        groupSize[i] = stats.items[i].size;
        groupSum[i] = stats.items[i].intensitySum;
    }
    const int divisor = stats.items[0].divisor;
    auto meanOf = [&](int root) {
        return static_cast<double>(groupSum[root]) / (static_cast<double>(groupSize[root]) * divisor);
    };

    MergedRegions result;
    bool linked = true;
    while (linked) {
        linked = false;
        ++result.rounds;
        // Links are decided on the means frozen at the start of the round.
        std::vector<double> mean(n);
        for (int i = 0; i < n; ++i) {
            if (parent[i] == i) mean[i] = meanOf(i);
        }
        std::vector<std::pair<int, int>> links;
        for (int j = 0; j < n; ++j) {
            const int rj = findRoot(parent, j);
            for (int k : graph.neighbors[j]) {
                if (k <= j) continue;
                const int rk = findRoot(parent, k);
                if (rj == rk) continue;
                const double ij = mean[rj];
                const double ik = mean[rk];
                if (linkCondition(ik, ij, params.relativeThreshold, m) ||
                    linkCondition(ij, ik, params.relativeThreshold, m)) {
                    links.emplace_back(rj, rk);
                }
            }
        }
        for (auto [a, b] : links) {
            a = findRoot(parent, a);
            b = findRoot(parent, b);
            if (a == b) continue;
            if (b < a) std::swap(a, b);
            parent[b] = a;
            groupSize[a] += groupSize[b];
            groupSum[a] += groupSum[b];
            linked = true;
        }
    }

    result.groupOf.assign(n, -1);
    std::vector<int> indexOfRoot(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = findRoot(parent, i);
        if (indexOfRoot[r] < 0) {
            indexOfRoot[r] = static_cast<int>(result.groups.size());
            result.groups.emplace_back();
        }
        const int gi = indexOfRoot[r];
        result.groupOf[i] = gi;
        result.groups[gi].members.push_back(i);
    }
    for (auto& g : result.groups) {
        int64_t size = 0;
        int64_t sum = 0;
        double wx = 0;
        double wy = 0;
        for (int i : g.members) {
            const auto& s = stats.items[i];
            size += s.size;
            sum += s.intensitySum;
            wx += s.cx * static_cast<double>(s.size);
            wy += s.cy * static_cast<double>(s.size);
        }
        g.size = size;
        g.intensity = static_cast<double>(sum) / (static_cast<double>(size) * divisor);
        g.cx = wx / static_cast<double>(size);
        g.cy = wy / static_cast<double>(size);
    }
    return result;
}

void fillBoundingBoxes(MergedRegions& regions, const LabelMap& labels) {
    for (auto& g : regions.groups) {
        g.minX = g.minY = std::numeric_limits<int>::max();
        g.maxX = g.maxY = -1;
    }
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            auto& g = regions.groups[regions.groupOf[labels.at(x, y)]];
            g.minX = std::min(g.minX, x);
            g.minY = std::min(g.minY, y);
            g.maxX = std::max(g.maxX, x);
            g.maxY = std::max(g.maxY, y);
        }
    }
}

LabelMap regionsToMask(const MergedRegions& regions, const LabelMap& labels) {
    LabelMap mask(labels.width, labels.height);
    for (size_t p = 0; p < labels.labels.size(); ++p) {
        mask.labels[p] = regions.groupOf.at(labels.labels[p]) + 1;
    }
    mask.clusterCount = static_cast<int>(regions.groups.size()) + 1;
    return mask;
}

SuperpixelStats groupStats(const MergedRegions& regions, const SuperpixelStats& stats) {
    SuperpixelStats out;
    out.width = stats.width;
    out.height = stats.height;
    for (const auto& g : regions.groups) {
        SuperpixelStat s;
        s.size = g.size;
        s.cx = g.cx;
        s.cy = g.cy;
        s.divisor = stats.items.front().divisor;
        for (int i : g.members) s.intensitySum += stats.items[i].intensitySum;
        s.intensity = g.intensity;
        out.items.push_back(s);
    }
    return out;
}

AdjacencyGraph groupAdjacency(const MergedRegions& regions, const AdjacencyGraph& graph) {
    AdjacencyGraph out;
    out.neighbors.resize(regions.groups.size());
    for (size_t i = 0; i < graph.size(); ++i) {
        const int gi = regions.groupOf[i];
        for (int j : graph.neighbors[i]) {
            const int gj = regions.groupOf[j];
            if (gi != gj) out.neighbors[gi].insert(gj);
        }
    }
    return out;
}

} // namespace rodseg
