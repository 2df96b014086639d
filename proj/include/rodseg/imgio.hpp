/**
 * @file imgio.hpp
 * @brief Frame ingestion, color conversion and mask/overlay I/O.
 *
 * Frames arrive either as 8-bit PNG (RGB or single channel) or as raw RGGB
 * Bayer dumps described by a sidecar JSON ({"width": W, "height": H}).
 * Label maps are stored as 16-bit grayscale PNG; value 0 is background.
 */

#pragma once

#include "rodseg/image.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace rodseg {

// =============================================================================
// Color conversion
// =============================================================================

/// Bilinear RGGB demosaic. Width and height must be even.
RasterImage debayer(const RasterImage& raw);

/// Luma with weights 0.299/0.587/0.114, rounded to nearest.
RasterImage toGray(const RasterImage& rgb);

/**
 * HSV hue and saturation planes. Hue is in half-degree units [0,179];
 * achromatic pixels (max == min) get hue 0 and saturation 0.
 */
std::pair<RasterImage, RasterImage> toHueSat(const RasterImage& rgb);

/// Single plane of an RGB8 image, tagged Gray8.
RasterImage extractChannel(const RasterImage& rgb, int channel);

/// Expand a single-channel image to RGB8 by replication.
RasterImage grayToRgb(const RasterImage& gray);

/// Sub-window [x0, x0+w) x [y0, y0+h) of any layout.
RasterImage cropImage(const RasterImage& img, int x0, int y0, int w, int h);

/// The four planes used for region descriptors.
struct ChannelSet {
    RasterImage rgb;
    RasterImage gray;
    RasterImage green;
    RasterImage hue;
    RasterImage sat;
};

ChannelSet makeChannelSet(const RasterImage& rgb);

/// Which plane a segmenter or the merge step works on.
enum class ChannelMode { Rgb, Hue, Gray };

/// "rgb" | "hue" | "gray" ("rgbmean" is accepted for Rgb). Throws ParameterError.
ChannelMode parseChannelMode(std::string_view name);
std::string_view channelModeName(ChannelMode mode);

/// The RGB frame itself, its hue plane, or its gray plane.
RasterImage channelImage(const RasterImage& rgb, ChannelMode mode);

/// Largest intensity of the mode's plane: 180 for hue, 255 otherwise.
double intensityMax(ChannelMode mode);

// =============================================================================
// File I/O
// =============================================================================

/// Reads an 8-bit PNG as RGB8 (color input) or Gray8 (single channel).
RasterImage readPng(const std::filesystem::path& path);

/// Writes RGB8 as color PNG and every single-channel layout as gray PNG.
void writePng(const std::filesystem::path& path, const RasterImage& img);

/// Raw Bayer buffer; dimensions come from `<stem>.json` next to the file.
RasterImage readRawBayer(const std::filesystem::path& path);

/// Any supported frame as RGB8: `.raw` is demosaiced, gray PNG is replicated.
RasterImage loadFrame(const std::filesystem::path& path);

/**
 * Reads a single-channel 8- or 16-bit PNG as a label map. When `expected`
 * dimensions are given, a mismatch raises IngestError.
 */
LabelMap loadMask(const std::filesystem::path& path,
                  std::optional<std::pair<int, int>> expected = std::nullopt);

/// Writes labels as a 16-bit gray PNG. Labels must be in [0, 65535].
void saveLabelMap(const std::filesystem::path& path, const LabelMap& labels);

// =============================================================================
// Overlay
// =============================================================================

/// Boundary colors indexed by class: background, paw, body, ear/nose/tail.
inline constexpr std::array<std::array<uint8_t, 3>, 4> kClassPalette = {{
    {255, 255, 0},
    {0, 255, 255},
    {255, 0, 0},
    {255, 0, 255},
}};

/**
 * Draws region boundaries on a copy of `rgb`. A pixel is a boundary pixel
 * when a 4-neighbor carries a different region id. `regionClass[id]` picks
 * the palette entry; ids without a class use the background color.
 */
RasterImage renderOverlay(const RasterImage& rgb, const LabelMap& regions,
                          const std::vector<int>& regionClass = {});

} // namespace rodseg
