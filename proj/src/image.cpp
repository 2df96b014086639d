#include "rodseg/image.hpp"

#include <algorithm>
#include <map>
#include <queue>

namespace rodseg {

int samplesPerPixel(Layout layout) {
    return layout == Layout::RGB8 ? 3 : 1;
}

std::string_view layoutName(Layout layout) {
    switch (layout) {
    case Layout::BayerRGGB8: return "BayerRGGB8";
    case Layout::RGB8: return "RGB8";
    case Layout::Gray8: return "Gray8";
    case Layout::Hue8: return "Hue8";
    case Layout::Sat8: return "Sat8";
    }
    return "?";
}

int maxSample(Layout layout) {
    return layout == Layout::Hue8 ? 179 : 255;
}

RasterImage::RasterImage(int width, int height, Layout layout)
    : RasterImage(width, height, layout,
                  std::vector<uint8_t>(static_cast<size_t>(std::max(width, 0)) * std::max(height, 0) *
                                       samplesPerPixel(layout), 0)) {}

RasterImage::RasterImage(int width, int height, Layout layout, std::vector<uint8_t> data)
    : width_(width), height_(height), layout_(layout), data_(std::move(data)) {
    if (width < 0 || height < 0) {
        throw DimensionError("negative image dimensions");
    }
    if (data_.size() != static_cast<size_t>(width) * height * samplesPerPixel(layout)) {
        throw DimensionError("buffer length " + std::to_string(data_.size()) + " does not match " +
                             std::to_string(width) + "x" + std::to_string(height) + " " +
                             std::string(layoutName(layout)));
    }
    if (layout == Layout::Hue8) {
        for (uint8_t v : data_) {
            if (v > 179) throw Error("hue sample " + std::to_string(v) + " outside [0,179]");
        }
    }
}

void requireLayout(const RasterImage& img, std::initializer_list<Layout> allowed, std::string_view op) {
    if (std::find(allowed.begin(), allowed.end(), img.layout()) == allowed.end()) {
        throw LayoutError(std::string(op) + ": unsupported layout " + std::string(layoutName(img.layout())));
    }
}

LabelMap::LabelMap(int w, int h, int32_t fill)
    : width(w), height(h), labels(static_cast<size_t>(w) * h, fill), clusterCount(w * h > 0 ? fill + 1 : 0) {}

void LabelMap::updateClusterCount() {
    clusterCount = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

LabelMap compactLabels(const LabelMap& in) {
    std::map<int32_t, int32_t> remap;
    for (int32_t v : in.labels) remap.emplace(v, 0);
    int32_t next = 0;
    for (auto& [value, id] : remap) id = next++;
    LabelMap out = in;
    for (auto& v : out.labels) v = remap[v];
    out.clusterCount = next;
    return out;
}

LabelMap relabelScanOrder(const LabelMap& in) {
    std::map<int32_t, int32_t> remap;
    LabelMap out = in;
    int32_t next = 0;
    for (auto& v : out.labels) {
        auto [it, inserted] = remap.emplace(v, next);
        if (inserted) ++next;
        v = it->second;
    }
    out.clusterCount = next;
    return out;
}

std::vector<int64_t> labelSizes(const LabelMap& labels) {
    std::vector<int64_t> sizes(std::max(labels.clusterCount, 0), 0);
    for (int32_t v : labels.labels) {
        if (v >= 0 && v < labels.clusterCount) ++sizes[v];
    }
    return sizes;
}

std::vector<int> componentsPerLabel(const LabelMap& labels) {
    std::vector<int> count(std::max(labels.clusterCount, 0), 0);
    std::vector<uint8_t> seen(labels.pixelCount(), 0);
    const int w = labels.width;
    const int h = labels.height;
    std::queue<int> frontier;
    for (int start = 0; start < w * h; ++start) {
        if (seen[start]) continue;
        const int32_t id = labels.labels[start];
        if (id >= 0 && id < labels.clusterCount) ++count[id];
        seen[start] = 1;
        frontier.push(start);
        while (!frontier.empty()) {
            const int p = frontier.front();
            frontier.pop();
            const int x = p % w;
            const int y = p / w;
            const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& n : nbr) {
                if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
                const int q = n[1] * w + n[0];
                if (!seen[q] && labels.labels[q] == id) {
                    seen[q] = 1;
                    frontier.push(q);
                }
            }
        }
    }
    return count;
}

size_t BinaryMask::count() const {
    return static_cast<size_t>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

BinaryMask maskOf(const LabelMap& labels, int32_t value) {
    BinaryMask m(labels.width, labels.height);
    for (size_t i = 0; i < labels.labels.size(); ++i) m.bits[i] = labels.labels[i] == value ? 1 : 0;
    return m;
}

} // namespace rodseg
