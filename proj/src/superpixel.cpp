#include "rodseg/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

namespace rodseg {

namespace {

void requireSegmentable(const RasterImage& img, const char* op) {
    requireLayout(img, {Layout::RGB8, Layout::Gray8, Layout::Hue8, Layout::Sat8}, op);
    if (img.empty()) throw DimensionError(std::string(op) + ": empty image");
}

std::vector<double> toDouble(const RasterImage& img) {
    return std::vector<double>(img.data().begin(), img.data().end());
}

// Disjoint-set forest with union by size and path halving.
class DisjointSets {
public:
    explicit DisjointSets(int n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    int join(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return a;
    }

    int size(int x) { return size_[find(x)]; }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
};

LabelMap labelsFromRoots(int width, int height, DisjointSets& sets) {
    LabelMap out(width, height);
    for (int i = 0; i < width * height; ++i) out.labels[i] = sets.find(i);
    return relabelScanOrder(out);
}

} // namespace

// =============================================================================
// SLIC
// =============================================================================

void SlicParams::validate() const {
    if (segmentCount < 1) throw ParameterError("slic: segment count must be >= 1");
    if (!(compactness > 0)) throw ParameterError("slic: compactness must be > 0");
    if (iterations < 1) throw ParameterError("slic: iterations must be >= 1");
}

std::vector<double> slicGradient(const RasterImage& img) {
    const int w = img.width();
    const int h = img.height();
    const int nc = img.channels();
    std::vector<double> grad(img.pixelCount(), 0.0);
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            double g = 0;
            for (int c = 0; c < nc; ++c) {
                g += std::abs(img.at(xp, y, c) - img.at(xm, y, c)) + std::abs(img.at(x, yp, c) - img.at(x, ym, c));
            }
            grad[static_cast<size_t>(y) * w + x] = g;
        }
    }
    return grad;
}

SlicGrid slicGrid(const RasterImage& img, int segmentCount) {
    requireSegmentable(img, "slic");
    const int w = img.width();
    const int h = img.height();
    const double pixels = static_cast<double>(img.pixelCount());
    if (segmentCount < 1) throw ParameterError("slic: segment count must be >= 1");
    if (segmentCount > pixels) {
        throw ParameterError("slic: segment count " + std::to_string(segmentCount) + " exceeds pixel count");
    }

    SlicGrid grid;
    grid.step = std::sqrt(pixels / segmentCount);
    int nx = std::clamp(static_cast<int>(std::lround(w / grid.step)), 1, w);
    int ny = std::clamp(static_cast<int>(std::lround(h / grid.step)), 1, h);
    // Grow the coarser axis until the grid holds at least N cells.
    while (static_cast<long>(nx) * ny < segmentCount) {
        const bool widen = (static_cast<double>(w) / nx >= static_cast<double>(h) / ny && nx < w) || ny == h;
        if (widen) {
            ++nx;
        } else {
            ++ny;
        }
    }
    grid.columns = nx;
    grid.rows = ny;
    grid.cellArea = pixels / (static_cast<double>(nx) * ny);

    const std::vector<double> grad = slicGradient(img);
    const int nc = img.channels();
    grid.centers.reserve(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int sx = static_cast<int>(std::floor((i + 0.5) * w / nx));
            const int sy = static_cast<int>(std::floor((j + 0.5) * h / ny));
            int bx = sx;
            int by = sy;
            double best = grad[static_cast<size_t>(sy) * w + sx];
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = sx + dx;
                    const int y = sy + dy;
                    if (x < 0 || y < 0 || x >= w || y >= h) continue;
                    const double g = grad[static_cast<size_t>(y) * w + x];
                    if (g < best) {
                        best = g;
                        bx = x;
                        by = y;
                    }
                }
            }
            SlicCenter c;
            c.x = bx;
            c.y = by;
            for (int ch = 0; ch < nc; ++ch) c.color[ch] = img.at(bx, by, ch);
            grid.centers.push_back(c);
        }
    }
    return grid;
}

SlicClustering slicCluster(const RasterImage& img, const SlicParams& params) {
    params.validate();
    SlicClustering result;
    result.grid = slicGrid(img, params.segmentCount);

    const int w = img.width();
    const int h = img.height();
    const int nc = img.channels();
    const size_t n = img.pixelCount();
    const double step = result.grid.step;
    const double spatialWeight = (params.compactness * params.compactness) / (step * step);
    const std::vector<double> pixels = toDouble(img);

    std::vector<SlicCenter> centers = result.grid.centers;
    const int k = static_cast<int>(centers.size());
    std::vector<int32_t> labels(n, -1);
    std::vector<int32_t> next(n);
    std::vector<double> dist(n);

    auto jointDistance = [&](size_t p, int x, int y, const SlicCenter& c) {
        double dc2 = 0;
        for (int ch = 0; ch < nc; ++ch) {
            const double d = pixels[p * nc + ch] - c.color[ch];
            dc2 += d * d;
        }
        const double dx = x - c.x;
        const double dy = y - c.y;
        return dc2 + (dx * dx + dy * dy) * spatialWeight;
    };

    for (int iter = 0; iter < params.iterations; ++iter) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::fill(next.begin(), next.end(), -1);

        for (int ci = 0; ci < k; ++ci) {
            const SlicCenter& c = centers[ci];
            const int x0 = std::max(0, static_cast<int>(std::ceil(c.x - step)));
            const int x1 = std::min(w - 1, static_cast<int>(std::floor(c.x + step)));
            const int y0 = std::max(0, static_cast<int>(std::ceil(c.y - step)));
            const int y1 = std::min(h - 1, static_cast<int>(std::floor(c.y + step)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const size_t p = static_cast<size_t>(y) * w + x;
                    const double d = jointDistance(p, x, y, c);
                    if (d < dist[p]) {
                        dist[p] = d;
                        next[p] = ci;
                    }
                }
            }
        }
        // Pixels outside every search window fall back to the global nearest center.
        for (size_t p = 0; p < n; ++p) {
            if (next[p] >= 0) continue;
            const int x = static_cast<int>(p % w);
            const int y = static_cast<int>(p / w);
            for (int ci = 0; ci < k; ++ci) {
                const double d = jointDistance(p, x, y, centers[ci]);
                if (d < dist[p]) {
                    dist[p] = d;
                    next[p] = ci;
                }
            }
        }

        result.energy.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));
        result.iterationsRun = iter + 1;
        if (next == labels) {
            result.converged = true;
            break;
        }
        labels.swap(next);

        std::vector<double> sums(static_cast<size_t>(k) * (2 + nc), 0.0);
        std::vector<int64_t> counts(k, 0);
        for (size_t p = 0; p < n; ++p) {
            const int ci = labels[p];
            double* s = &sums[static_cast<size_t>(ci) * (2 + nc)];
            s[0] += static_cast<double>(p % w);
            s[1] += static_cast<double>(p / w);
            for (int ch = 0; ch < nc; ++ch) s[2 + ch] += pixels[p * nc + ch];
            ++counts[ci];
        }
        for (int ci = 0; ci < k; ++ci) {
            if (counts[ci] == 0) continue;
            const double* s = &sums[static_cast<size_t>(ci) * (2 + nc)];
            const double cnt = static_cast<double>(counts[ci]);
            centers[ci].x = s[0] / cnt;
            centers[ci].y = s[1] / cnt;
            for (int ch = 0; ch < nc; ++ch) centers[ci].color[ch] = s[2 + ch] / cnt;
        }
    }

    result.assignment.width = w;
    result.assignment.height = h;
    result.assignment.labels = std::move(labels);
    result.assignment.clusterCount = k;
    result.centers = std::move(centers);
    return result;
}

LabelMap enforceConnectivity(const LabelMap& labels, double minSize, double maxSize) {
    const int w = labels.width;
    const int h = labels.height;
    const int n = w * h;

    // 4-connected components of equal label, numbered in scan order.
    std::vector<int> comp(n, -1);
    std::vector<int64_t> compSize;
    std::queue<int> frontier;
    for (int start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        const int id = static_cast<int>(compSize.size());
        const int32_t label = labels.labels[start];
        int64_t size = 0;
        comp[start] = id;
        frontier.push(start);
        while (!frontier.empty()) {
            const int p = frontier.front();
            frontier.pop();
            ++size;
            const int x = p % w;
            const int y = p / w;
            const int nbr[4] = {x > 0 ? p - 1 : -1, x + 1 < w ? p + 1 : -1, y > 0 ? p - w : -1, y + 1 < h ? p + w : -1};
            for (int q : nbr) {
                if (q >= 0 && comp[q] < 0 && labels.labels[q] == label) {
                    comp[q] = id;
                    frontier.push(q);
                }
            }
        }
        compSize.push_back(size);
    }

    const int m = static_cast<int>(compSize.size());
    std::vector<std::set<int>> adjacent(m);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = comp[y * w + x];
            if (x + 1 < w && comp[y * w + x + 1] != a) {
                adjacent[a].insert(comp[y * w + x + 1]);
                adjacent[comp[y * w + x + 1]].insert(a);
            }
            if (y + 1 < h && comp[(y + 1) * w + x] != a) {
                adjacent[a].insert(comp[(y + 1) * w + x]);
                adjacent[comp[(y + 1) * w + x]].insert(a);
            }
        }
    }

    // Fold orphans into the largest neighbor that stays within the size bound.
    std::vector<int> owner(m);
    std::iota(owner.begin(), owner.end(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int g = 0; g < m; ++g) {
            if (owner[g] != g || compSize[g] >= minSize) continue;
            int target = -1;
            for (int c : adjacent[g]) {
                if (compSize[g] + compSize[c] > maxSize) continue;
                if (target < 0 || compSize[c] > compSize[target]) target = c;
            }
            if (target < 0) continue;
            owner[g] = target;
            compSize[target] += compSize[g];
            for (int c : adjacent[g]) {
                if (c == target) continue;
                adjacent[c].erase(g);
                adjacent[c].insert(target);
                adjacent[target].insert(c);
            }
            adjacent[target].erase(g);
            adjacent[g].clear();
            changed = true;
        }
    }

    LabelMap out(w, h);
    for (int p = 0; p < n; ++p) {
        int g = comp[p];
        while (owner[g] != g) g = owner[g];
        out.labels[p] = g;
    }
    return relabelScanOrder(out);
}

LabelMap slicSegment(const RasterImage& img, const SlicParams& params) {
    SlicClustering clustering = slicCluster(img, params);
    if (!params.enforceConnectivity) return relabelScanOrder(clustering.assignment);
    const double step = clustering.grid.step;
    return enforceConnectivity(clustering.assignment, step * step / 4.0, 2.0 * clustering.grid.cellArea);
}

// =============================================================================
// Graph-based
// =============================================================================

void GbParams::validate() const {
    if (!(scale > 0)) throw ParameterError("gb: scale must be > 0");
    if (!(sigma > 0)) throw ParameterError("gb: sigma must be > 0");
    if (minSize < 1) throw ParameterError("gb: min size must be >= 1");
}

std::vector<std::vector<float>> gaussianSmooth(const RasterImage& img, double sigma) {
    const int w = img.width();
    const int h = img.height();
    const int nc = img.channels();
    sigma = std::max(sigma, 0.01);
    const int radius = static_cast<int>(std::ceil(sigma * 4.0));
    std::vector<double> kernel(radius + 1);
    double total = 0;
    for (int i = 0; i <= radius; ++i) {
        kernel[i] = std::exp(-0.5 * (i / sigma) * (i / sigma));
        total += i == 0 ? kernel[i] : 2 * kernel[i];
    }
    for (auto& v : kernel) v /= total;

    std::vector<std::vector<float>> planes(nc, std::vector<float>(img.pixelCount()));
    std::vector<float> tmp(img.pixelCount());
    for (int c = 0; c < nc; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = kernel[0] * img.at(x, y, c);
                for (int i = 1; i <= radius; ++i) {
                    acc += kernel[i] * (img.at(std::max(x - i, 0), y, c) + img.at(std::min(x + i, w - 1), y, c));
                }
                tmp[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
            }
        }
        auto& out = planes[c];
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = kernel[0] * tmp[static_cast<size_t>(y) * w + x];
                for (int i = 1; i <= radius; ++i) {
                    acc += kernel[i] * (tmp[static_cast<size_t>(std::max(y - i, 0)) * w + x] +
                                        tmp[static_cast<size_t>(std::min(y + i, h - 1)) * w + x]);
                }
                out[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
            }
        }
    }
    return planes;
}

LabelMap gbSegment(const RasterImage& img, const GbParams& params) {
    requireSegmentable(img, "gb");
    params.validate();
    const int w = img.width();
    const int h = img.height();
    const auto planes = gaussianSmooth(img, params.sigma);

    struct Edge {
        float weight;
        int a;
        int b;
    };
    auto weight = [&](int a, int b) {
        double acc = 0;
        for (const auto& plane : planes) {
            const double d = plane[a] - plane[b];
            acc += d * d;
        }
        return static_cast<float>(std::sqrt(acc));
    };

    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(w) * h * 4);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int p = y * w + x;
            if (x + 1 < w) edges.push_back({weight(p, p + 1), p, p + 1});
            if (y + 1 < h) edges.push_back({weight(p, p + w), p, p + w});
            if (x + 1 < w && y + 1 < h) edges.push_back({weight(p, p + w + 1), p, p + w + 1});
            if (x + 1 < w && y > 0) edges.push_back({weight(p, p - w + 1), p, p - w + 1});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
        if (l.weight != r.weight) return l.weight < r.weight;
        if (l.a != r.a) return l.a < r.a;
        return l.b < r.b;
    });

    DisjointSets sets(w * h);
    std::vector<double> threshold(static_cast<size_t>(w) * h, params.scale);
    for (const Edge& e : edges) {
        const int a = sets.find(e.a);
        const int b = sets.find(e.b);
        if (a == b) continue;
        if (e.weight <= threshold[a] && e.weight <= threshold[b]) {
            const int root = sets.join(a, b);
            threshold[root] = e.weight + params.scale / sets.size(root);
        }
    }
    for (const Edge& e : edges) {
        const int a = sets.find(e.a);
        const int b = sets.find(e.b);
        if (a != b && (sets.size(a) < params.minSize || sets.size(b) < params.minSize)) sets.join(a, b);
    }
    return labelsFromRoots(w, h, sets);
}

// =============================================================================
// Quick shift
// =============================================================================

void QsParams::validate() const {
    if (!(kernelSize > 0)) throw ParameterError("qs: kernel size must be > 0");
    if (!(maxDistance > 0)) throw ParameterError("qs: max distance must be > 0");
    if (!(ratio > 0)) throw ParameterError("qs: ratio must be > 0");
}

QuickShiftForest quickShiftForest(const RasterImage& img, const QsParams& params) {
    requireSegmentable(img, "qs");
    params.validate();
    const int w = img.width();
    const int h = img.height();
    const int nc = img.channels();
    const size_t n = img.pixelCount();
    const auto& px = img.data();
    const double sigma = params.kernelSize;
    const double twoSigma2 = 2.0 * sigma * sigma;
    const double ratio2 = params.ratio * params.ratio;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));

    // The joint kernel factors into a spatial and a range Gaussian; both are tabulated.
    std::vector<double> spatialKernel(static_cast<size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            spatialKernel[static_cast<size_t>(dy + radius) * (2 * radius + 1) + dx + radius] =
                std::exp(-static_cast<double>(dx * dx + dy * dy) / twoSigma2);
        }
    }
    std::vector<double> rangeKernel(static_cast<size_t>(nc) * 255 * 255 + 1);
    for (size_t q = 0; q < rangeKernel.size(); ++q) {
        rangeKernel[q] = std::exp(-(ratio2 * static_cast<double>(q)) / twoSigma2);
    }

    auto colorDistance2 = [&](size_t a, size_t b) {
        int q = 0;
        for (int c = 0; c < nc; ++c) {
            const int d = px[a * nc + c] - px[b * nc + c];
            q += d * d;
        }
        return q;
    };

    QuickShiftForest forest;
    forest.density.assign(n, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            double e = 0;
            for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) {
                const double* krow = &spatialKernel[static_cast<size_t>(yy - y + radius) * (2 * radius + 1)];
                for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) {
                    const size_t j = static_cast<size_t>(yy) * w + xx;
                    e += krow[xx - x + radius] * rangeKernel[colorDistance2(i, j)];
                }
            }
            forest.density[i] = e;
        }
    }

    const double maxDist2 = params.maxDistance * params.maxDistance;
    const int linkRadius = static_cast<int>(std::ceil(params.maxDistance));
    forest.parent.resize(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const double ei = forest.density[i];
            double best = maxDist2;
            size_t parent = i;
            for (int yy = std::max(0, y - linkRadius); yy <= std::min(h - 1, y + linkRadius); ++yy) {
                for (int xx = std::max(0, x - linkRadius); xx <= std::min(w - 1, x + linkRadius); ++xx) {
                    const size_t j = static_cast<size_t>(yy) * w + xx;
                    const double ej = forest.density[j];
                    if (!(ej > ei || (ej == ei && j > i))) continue;
                    const double d2 = static_cast<double>((xx - x) * (xx - x) + (yy - y) * (yy - y)) +
                                      ratio2 * static_cast<double>(colorDistance2(i, j));
                    if (d2 < best) {
                        best = d2;
                        parent = j;
                    }
                }
            }
            forest.parent[i] = static_cast<int>(parent);
        }
    }
    return forest;
}

LabelMap labelsFromForest(int width, int height, const std::vector<int>& parent) {
    const size_t n = parent.size();
    std::vector<int> root(n, -1);
    std::vector<int> path;
    for (size_t i = 0; i < n; ++i) {
        int p = static_cast<int>(i);
        while (root[p] < 0 && parent[p] != p) {
            path.push_back(p);
            p = parent[p];
        }
        const int r = root[p] >= 0 ? root[p] : p;
        root[p] = r;
        for (int q : path) root[q] = r;
        path.clear();
    }
    LabelMap out(width, height);
    for (size_t i = 0; i < n; ++i) out.labels[i] = root[i];
    return relabelScanOrder(out);
}

LabelMap qsSegment(const RasterImage& img, const QsParams& params) {
    QuickShiftForest forest = quickShiftForest(img, params);
    return labelsFromForest(img.width(), img.height(), forest.parent);
}

} // namespace rodseg
