/**
 * @file image.hpp
 * @brief Core raster types shared by every stage of the pipeline.
 */

#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rodseg {

// =============================================================================
// Errors
// =============================================================================

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image dimensions are invalid or do not match between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Image carries the wrong channel layout for the requested operation.
class LayoutError : public Error {
public:
    using Error::Error;
};

/// A numeric parameter is out of its valid range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A file could not be read or does not match its companion data.
class IngestError : public Error {
public:
    using Error::Error;
};

// =============================================================================
// RasterImage
// =============================================================================

enum class Layout { BayerRGGB8, RGB8, Gray8, Hue8, Sat8 };

int samplesPerPixel(Layout layout);
std::string_view layoutName(Layout layout);

/// Largest legal sample value for a layout (179 for hue, 255 otherwise).
int maxSample(Layout layout);

/**
 * Row-major 8-bit raster with a channel-layout tag.
 *
 * Construction validates the buffer length and the sample range of the
 * layout; a Hue8 image never holds a sample above 179.
 */
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, Layout layout);
    RasterImage(int width, int height, Layout layout, std::vector<uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    Layout layout() const { return layout_; }
    int channels() const { return samplesPerPixel(layout_); }
    size_t pixelCount() const { return static_cast<size_t>(width_) * height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    const std::vector<uint8_t>& data() const { return data_; }
    std::vector<uint8_t>& data() { return data_; }

    uint8_t at(int x, int y, int c = 0) const {
        return data_[(static_cast<size_t>(y) * width_ + x) * channels() + c];
    }
    uint8_t& at(int x, int y, int c = 0) {
        return data_[(static_cast<size_t>(y) * width_ + x) * channels() + c];
    }

    bool operator==(const RasterImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    Layout layout_ = Layout::Gray8;
    std::vector<uint8_t> data_;
};

/// Throws LayoutError unless img.layout() is one of the allowed layouts.
void requireLayout(const RasterImage& img, std::initializer_list<Layout> allowed, std::string_view op);

// =============================================================================
// LabelMap
// =============================================================================

/**
 * Per-pixel integer labels. Segmenters emit ids in [0, clusterCount) with
 * every id present; masks loaded from disk may leave ids unused.
 */
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int32_t> labels;
    int clusterCount = 0;

    LabelMap() = default;
    LabelMap(int w, int h, int32_t fill = 0);

    size_t pixelCount() const { return static_cast<size_t>(width) * height; }
    int32_t at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
    int32_t& at(int x, int y) { return labels[static_cast<size_t>(y) * width + x]; }

    /// Recompute clusterCount as max label + 1 (0 for an empty map).
    void updateClusterCount();

    bool operator==(const LabelMap&) const = default;
};

/// Renumbers distinct label values to 0..K-1 in ascending value order.
LabelMap compactLabels(const LabelMap& labels);

/// Renumbers labels to 0..K-1 in order of first appearance in scan order.
LabelMap relabelScanOrder(const LabelMap& labels);

/// Per-label pixel counts, indexed by label id (size clusterCount).
std::vector<int64_t> labelSizes(const LabelMap& labels);

/// Number of 4-connected components of each label (size clusterCount).
std::vector<int> componentsPerLabel(const LabelMap& labels);

// =============================================================================
// BinaryMask
// =============================================================================

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;  // 0 or 1

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

    size_t pixelCount() const { return static_cast<size_t>(width) * height; }
    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t count() const;
};

/// Pixels whose label equals `value`.
BinaryMask maskOf(const LabelMap& labels, int32_t value);

} // namespace rodseg
