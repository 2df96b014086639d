#include "rodseg/imgio.hpp"

#include <png.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace rodseg {

namespace {

enum class BayerSite { Red, GreenOnRed, GreenOnBlue, Blue };

BayerSite siteAt(int x, int y) {
    if (y % 2 == 0) return x % 2 == 0 ? BayerSite::Red : BayerSite::GreenOnRed;
    return x % 2 == 0 ? BayerSite::GreenOnBlue : BayerSite::Blue;
}

// Rounded mean of the in-bounds raw samples at the given offsets.
uint8_t averageAt(const RasterImage& raw, int x, int y, std::initializer_list<std::pair<int, int>> offsets) {
    int sum = 0;
    int n = 0;
    for (auto [dx, dy] : offsets) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= raw.width() || ny >= raw.height()) continue;
        sum += raw.at(nx, ny);
        ++n;
    }
    return static_cast<uint8_t>((sum + n / 2) / n);
}

constexpr std::initializer_list<std::pair<int, int>> kCross = {{0, -1}, {-1, 0}, {1, 0}, {0, 1}};
constexpr std::initializer_list<std::pair<int, int>> kDiagonal = {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
constexpr std::initializer_list<std::pair<int, int>> kHorizontal = {{-1, 0}, {1, 0}};
constexpr std::initializer_list<std::pair<int, int>> kVertical = {{0, -1}, {0, 1}};

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr openFile(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) throw IngestError("cannot open " + path.string());
    return f;
}

[[noreturn]] void pngError(png_structp, png_const_charp msg) {
    throw IngestError(std::string("png: ") + msg);
}

void pngWarning(png_structp, png_const_charp) {}

struct DecodedPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bitDepth = 0;
    std::vector<uint8_t> bytes;  // row-major, big-endian samples for 16-bit
};

DecodedPng decodePng(const std::filesystem::path& path, bool keepSixteenBit) {
    FilePtr f = openFile(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw IngestError(path.string() + " is not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, pngError, pngWarning);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& p;
        png_infop& i;
        ~Guard() { png_destroy_read_struct(&p, &i, nullptr); }
    } guard{png, info};

    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int colorType = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (colorType == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (colorType & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    if (depth == 16 && !keepSixteenBit) png_set_strip_16(png);
    png_read_update_info(png, info);

    DecodedPng out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bitDepth = png_get_bit_depth(png, info);
    const size_t rowBytes = png_get_rowbytes(png, info);
    out.bytes.resize(rowBytes * out.height);
    std::vector<png_bytep> rows(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + rowBytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return out;
}

void encodePng(const std::filesystem::path& path, int width, int height, int colorType, int bitDepth,
               const std::vector<uint8_t>& bytes) {
    FilePtr f = openFile(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, pngError, pngWarning);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& p;
        png_infop& i;
        ~Guard() { png_destroy_write_struct(&p, &i); }
    } guard{png, info};

    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, bitDepth, colorType, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const size_t rowBytes = bytes.size() / std::max(height, 1);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(bytes.data() + rowBytes * y));
    }
    png_write_end(png, nullptr);
}

} // namespace

// =============================================================================
// Color conversion
// =============================================================================

RasterImage debayer(const RasterImage& raw) {
    if (raw.layout() != Layout::BayerRGGB8) {
        throw DimensionError("debayer: expected BayerRGGB8 input, got " + std::string(layoutName(raw.layout())));
    }
    if (raw.width() % 2 != 0 || raw.height() % 2 != 0 || raw.empty()) {
        throw DimensionError("debayer: dimensions must be even and non-zero");
    }
    RasterImage rgb(raw.width(), raw.height(), Layout::RGB8);
    for (int y = 0; y < raw.height(); ++y) {
        for (int x = 0; x < raw.width(); ++x) {
            const uint8_t self = raw.at(x, y);
            uint8_t r = 0, g = 0, b = 0;
            switch (siteAt(x, y)) {
            case BayerSite::Red:
                r = self;
                g = averageAt(raw, x, y, kCross);
                b = averageAt(raw, x, y, kDiagonal);
                break;
            case BayerSite::GreenOnRed:
                r = averageAt(raw, x, y, kHorizontal);
                g = self;
                b = averageAt(raw, x, y, kVertical);
                break;
            case BayerSite::GreenOnBlue:
                r = averageAt(raw, x, y, kVertical);
                g = self;
                b = averageAt(raw, x, y, kHorizontal);
                break;
            case BayerSite::Blue:
                r = averageAt(raw, x, y, kDiagonal);
                g = averageAt(raw, x, y, kCross);
                b = self;
                break;
            }
            rgb.at(x, y, 0) = r;
            rgb.at(x, y, 1) = g;
            rgb.at(x, y, 2) = b;
        }
    }
    return rgb;
}

RasterImage toGray(const RasterImage& rgb) {
    requireLayout(rgb, {Layout::RGB8}, "toGray");
    RasterImage gray(rgb.width(), rgb.height(), Layout::Gray8);
    const auto& src = rgb.data();
    auto& dst = gray.data();
    for (size_t i = 0; i < dst.size(); ++i) {
        const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
        dst[i] = static_cast<uint8_t>(std::clamp(std::lround(y), 0L, 255L));
    }
    return gray;
}

std::pair<RasterImage, RasterImage> toHueSat(const RasterImage& rgb) {
    requireLayout(rgb, {Layout::RGB8}, "toHueSat");
    RasterImage hue(rgb.width(), rgb.height(), Layout::Hue8);
    RasterImage sat(rgb.width(), rgb.height(), Layout::Sat8);
    const auto& src = rgb.data();
    for (size_t i = 0; i < rgb.pixelCount(); ++i) {
        const int r = src[3 * i];
        const int g = src[3 * i + 1];
        const int b = src[3 * i + 2];
        const int hi = std::max({r, g, b});
        const int lo = std::min({r, g, b});
        const int delta = hi - lo;
        if (delta == 0) continue;  // achromatic: hue 0, sat 0

        double degrees;
        if (hi == r) {
            degrees = 60.0 * (g - b) / delta;
        } else if (hi == g) {
            degrees = 120.0 + 60.0 * (b - r) / delta;
        } else {
            degrees = 240.0 + 60.0 * (r - g) / delta;
        }
        if (degrees < 0) degrees += 360.0;
        long h = std::lround(degrees / 2.0);
        if (h >= 180) h -= 180;
        hue.data()[i] = static_cast<uint8_t>(h);
        sat.data()[i] = static_cast<uint8_t>(std::lround(255.0 * delta / hi));
    }
    return {std::move(hue), std::move(sat)};
}

RasterImage extractChannel(const RasterImage& rgb, int channel) {
    requireLayout(rgb, {Layout::RGB8}, "extractChannel");
    if (channel < 0 || channel > 2) throw ParameterError("extractChannel: channel must be 0..2");
    RasterImage out(rgb.width(), rgb.height(), Layout::Gray8);
    for (size_t i = 0; i < rgb.pixelCount(); ++i) out.data()[i] = rgb.data()[3 * i + channel];
    return out;
}

RasterImage grayToRgb(const RasterImage& gray) {
    if (gray.channels() != 1) throw LayoutError("grayToRgb: expected single-channel input");
    RasterImage out(gray.width(), gray.height(), Layout::RGB8);
    for (size_t i = 0; i < gray.pixelCount(); ++i) {
        out.data()[3 * i] = out.data()[3 * i + 1] = out.data()[3 * i + 2] = gray.data()[i];
    }
    return out;
}

RasterImage cropImage(const RasterImage& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > img.width() || y0 + h > img.height()) {
        throw DimensionError("cropImage: window outside image");
    }
    const int c = img.channels();
    std::vector<uint8_t> data(static_cast<size_t>(w) * h * c);
    for (int y = 0; y < h; ++y) {
        const auto* row = img.data().data() + (static_cast<size_t>(y0 + y) * img.width() + x0) * c;
        std::copy(row, row + static_cast<size_t>(w) * c, data.begin() + static_cast<size_t>(y) * w * c);
    }
    return RasterImage(w, h, img.layout(), std::move(data));
}

ChannelSet makeChannelSet(const RasterImage& rgb) {
    requireLayout(rgb, {Layout::RGB8}, "makeChannelSet");
    auto [hue, sat] = toHueSat(rgb);
    return ChannelSet{rgb, toGray(rgb), extractChannel(rgb, 1), std::move(hue), std::move(sat)};
}

ChannelMode parseChannelMode(std::string_view name) {
    if (name == "rgb" || name == "rgbmean") return ChannelMode::Rgb;
    if (name == "hue") return ChannelMode::Hue;
    if (name == "gray") return ChannelMode::Gray;
    throw ParameterError("unknown channel mode '" + std::string(name) + "'");
}

std::string_view channelModeName(ChannelMode mode) {
    switch (mode) {
    case ChannelMode::Rgb: return "rgb";
    case ChannelMode::Hue: return "hue";
    case ChannelMode::Gray: return "gray";
    }
    return "?";
}

RasterImage channelImage(const RasterImage& rgb, ChannelMode mode) {
    requireLayout(rgb, {Layout::RGB8}, "channelImage");
    switch (mode) {
    case ChannelMode::Rgb: return rgb;
    case ChannelMode::Hue: return toHueSat(rgb).first;
    case ChannelMode::Gray: return toGray(rgb);
    }
    return rgb;
}

double intensityMax(ChannelMode mode) {
    return mode == ChannelMode::Hue ? 180.0 : 255.0;
}

// =============================================================================
// File I/O
// =============================================================================

RasterImage readPng(const std::filesystem::path& path) {
    DecodedPng png = decodePng(path, false);
    if (png.channels == 3) return RasterImage(png.width, png.height, Layout::RGB8, std::move(png.bytes));
    if (png.channels == 1) return RasterImage(png.width, png.height, Layout::Gray8, std::move(png.bytes));
    throw IngestError(path.string() + ": unsupported channel count " + std::to_string(png.channels));
}

void writePng(const std::filesystem::path& path, const RasterImage& img) {
    const int type = img.layout() == Layout::RGB8 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    encodePng(path, img.width(), img.height(), type, 8, img.data());
}

RasterImage readRawBayer(const std::filesystem::path& path) {
    auto sidecar = path;
    sidecar.replace_extension(".json");
    std::ifstream meta(sidecar);
    if (!meta) throw IngestError("missing sidecar " + sidecar.string());
    nlohmann::json j;
    try {
        meta >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(sidecar.string() + ": " + e.what());
    }
    const int width = j.value("width", 0);
    const int height = j.value("height", 0);
    if (width <= 0 || height <= 0) throw IngestError(sidecar.string() + ": width/height missing");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string());
    std::vector<uint8_t> data(static_cast<size_t>(width) * height);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<size_t>(in.gcount()) != data.size()) {
        throw IngestError(path.string() + ": expected " + std::to_string(data.size()) + " bytes");
    }
    return RasterImage(width, height, Layout::BayerRGGB8, std::move(data));
}

RasterImage loadFrame(const std::filesystem::path& path) {
    if (path.extension() == ".raw") return debayer(readRawBayer(path));
    RasterImage img = readPng(path);
    return img.layout() == Layout::RGB8 ? img : grayToRgb(img);
}

LabelMap loadMask(const std::filesystem::path& path, std::optional<std::pair<int, int>> expected) {
    DecodedPng png = decodePng(path, true);
    if (png.channels != 1) throw IngestError(path.string() + ": mask must be single-channel");
    if (expected && (expected->first != png.width || expected->second != png.height)) {
        throw IngestError(path.string() + ": mask is " + std::to_string(png.width) + "x" +
                          std::to_string(png.height) + ", frame is " + std::to_string(expected->first) + "x" +
                          std::to_string(expected->second));
    }
    LabelMap labels(png.width, png.height);
    for (size_t i = 0; i < labels.labels.size(); ++i) {
        labels.labels[i] = png.bitDepth == 16 ? (png.bytes[2 * i] << 8) | png.bytes[2 * i + 1] : png.bytes[i];
    }
    labels.updateClusterCount();
    return labels;
}

void saveLabelMap(const std::filesystem::path& path, const LabelMap& labels) {
    std::vector<uint8_t> bytes(labels.pixelCount() * 2);
    for (size_t i = 0; i < labels.labels.size(); ++i) {
        const int32_t v = labels.labels[i];
        if (v < 0 || v > 65535) throw ParameterError("saveLabelMap: label " + std::to_string(v) + " exceeds 16 bits");
        bytes[2 * i] = static_cast<uint8_t>(v >> 8);
        bytes[2 * i + 1] = static_cast<uint8_t>(v & 0xff);
    }
    encodePng(path, labels.width, labels.height, PNG_COLOR_TYPE_GRAY, 16, bytes);
}

// =============================================================================
// Overlay
// =============================================================================

RasterImage renderOverlay(const RasterImage& rgb, const LabelMap& regions, const std::vector<int>& regionClass) {
    requireLayout(rgb, {Layout::RGB8}, "renderOverlay");
    if (rgb.width() != regions.width || rgb.height() != regions.height) {
        throw DimensionError("renderOverlay: frame and region map differ in size");
    }
    RasterImage out = rgb;
    const int w = regions.width;
    const int h = regions.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int32_t id = regions.at(x, y);
            const bool boundary = (x + 1 < w && regions.at(x + 1, y) != id) ||
                                  (y + 1 < h && regions.at(x, y + 1) != id) ||
                                  (x > 0 && regions.at(x - 1, y) != id) || (y > 0 && regions.at(x, y - 1) != id);
            if (!boundary) continue;
            int cls = 0;
            if (id >= 0 && static_cast<size_t>(id) < regionClass.size()) cls = regionClass[id];
            const auto& color = kClassPalette[std::clamp(cls, 0, 3)];
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = color[c];
        }
    }
    return out;
}

} // namespace rodseg
