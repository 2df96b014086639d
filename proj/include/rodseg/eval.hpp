/**
 * @file eval.hpp
 * @brief Pixel-level comparison against ground-truth masks, configuration
 *        sweeps and segmenter timing.
 */

#pragma once

#include "rodseg/image.hpp"
#include "rodseg/imgio.hpp"
#include "rodseg/superpixel.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rodseg {

/// Ground-truth class ids.
enum class BodyClass : int { Background = 0, Paw = 1, Body = 2, Tail = 3 };

std::string_view className(BodyClass c);
BodyClass parseClassName(std::string_view name);  // "paw" | "body" | "tail"

/**
 * Majority ground-truth class for every region id in `regions` (ids index
 * the result; id 0 and absent ids map to background). A tie for the top
 * count yields background.
 */
std::vector<int> assignClasses(const LabelMap& regions, const LabelMap& gt);

/// Pixels of regions assigned to `cls`.
BinaryMask classMask(const LabelMap& regions, const std::vector<int>& regionClass, int cls);

struct ConfusionCounts {
    int64_t tp = 0;
    int64_t fp = 0;
    int64_t tn = 0;
    int64_t fn = 0;

    int64_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt);

struct Metrics {
    double sensitivity = 0;
    double specificity = 0;
    double precision = 0;
    double accuracy = 0;
    bool degenerate = false;  // some ratio was 0/0 and reported as 0
};

Metrics metrics(const ConfusionCounts& c);

struct MetricRecord {
    std::string cls;
    std::string channels;
    int segments = 0;
    Metrics metrics;
    int frames = 0;
};

struct EvalFrame {
    RasterImage rgb;
    LabelMap gt;
    std::string name;
};

struct SweepConfig {
    std::vector<ChannelMode> channels = {ChannelMode::Rgb, ChannelMode::Hue, ChannelMode::Gray};
    std::vector<int> segmentCounts = {500, 1500, 4500};
    std::vector<BodyClass> classes = {BodyClass::Paw, BodyClass::Body, BodyClass::Tail};
    SlicParams slic;  // segmentCount is overridden per configuration
};

/**
 * Per-class metrics of region masks against ground truth, with the region
 * classes assigned by majority vote. One record per requested class.
 */
std::vector<Metrics> evaluateRegions(const LabelMap& regions, const LabelMap& gt, const std::vector<BodyClass>& classes);

/// Averages per-frame metrics (mean of ratios) into one record per class.
std::vector<MetricRecord> averageRecords(const std::vector<std::vector<Metrics>>& perFrame,
                                         const std::vector<BodyClass>& classes, std::string_view channels,
                                         int segments);

/**
 * Segment + merge every frame under each (channel, count) configuration and
 * average the per-class metrics over frames. Frames whose ground truth is
 * empty (no pixels) are skipped. Records are ordered class-major, then
 * channel, then segment count.
 */
std::vector<MetricRecord> rocSweep(const std::vector<EvalFrame>& frames, const SweepConfig& config);

std::string metricCsvHeader();
std::string metricCsvRow(const MetricRecord& r);

// =============================================================================
// Timing
// =============================================================================

enum class Method { Slic, Gb, Qs };

std::string_view methodName(Method m);
Method parseMethod(std::string_view name);

struct BenchConfig {
    SlicParams slic;
    GbParams gb;
    QsParams qs;
    ChannelMode channels = ChannelMode::Rgb;
    int repetitions = 3;
};

struct TimingRecord {
    Method method = Method::Slic;
    double meanSeconds = 0;
    int width = 0;
    int height = 0;
    int repetitions = 0;
    int runs = 0;  // timed runs, excluding warm-up
    std::string parameters;
};

/// Runs one segmenter on a prepared plane.
LabelMap runMethod(Method m, const RasterImage& plane, const BenchConfig& config);

/**
 * Wall-clock mean per frame for each method. Each frame is segmented once
 * as warm-up (discarded), then `repetitions` timed runs. Only segmentation
 * is timed; channel conversion happens before the clock starts.
 */
std::vector<TimingRecord> bench(const std::vector<Method>& methods, const std::vector<RasterImage>& frames,
                                const BenchConfig& config);

std::string timingCsvHeader();
std::string timingCsvRow(const TimingRecord& r);

/// Fixed-precision number formatting for CSV output.
std::string formatNumber(double v, int precision = 6);

} // namespace rodseg
