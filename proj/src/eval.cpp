#include "rodseg/eval.hpp"

#include "rodseg/log.hpp"
#include "rodseg/tracker.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <map>

namespace rodseg {

std::string_view className(BodyClass c) {
    switch (c) {
    case BodyClass::Background: return "background";
    case BodyClass::Paw: return "paw";
    case BodyClass::Body: return "body";
    case BodyClass::Tail: return "tail";
    }
    return "?";
}

BodyClass parseClassName(std::string_view name) {
    if (name == "paw") return BodyClass::Paw;
    if (name == "body") return BodyClass::Body;
    if (name == "tail") return BodyClass::Tail;
    if (name == "background") return BodyClass::Background;
    throw ParameterError("unknown class '" + std::string(name) + "'");
}

std::vector<int> assignClasses(const LabelMap& regions, const LabelMap& gt) {
    if (regions.width != gt.width || regions.height != gt.height) {
        throw DimensionError("assignClasses: regions and ground truth differ in size");
    }
    const int n = std::max(regions.clusterCount, 0);
    std::vector<std::array<int64_t, 4>> votes(n, std::array<int64_t, 4>{});
    for (size_t p = 0; p < regions.labels.size(); ++p) {
        const int id = regions.labels[p];
        const int cls = gt.labels[p];
        if (id < 0 || id >= n || cls < 0 || cls > 3) continue;
        ++votes[id][cls];
    }
    std::vector<int> out(n, 0);
    for (int id = 1; id < n; ++id) {
        const auto& v = votes[id];
        const int64_t top = *std::max_element(v.begin(), v.end());
        if (top == 0) continue;
        if (std::count(v.begin(), v.end(), top) > 1) continue;  // tie -> background
        out[id] = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    }
    return out;
}

BinaryMask classMask(const LabelMap& regions, const std::vector<int>& regionClass, int cls) {
    BinaryMask m(regions.width, regions.height);
    for (size_t p = 0; p < regions.labels.size(); ++p) {
        const int id = regions.labels[p];
        m.bits[p] = id >= 0 && static_cast<size_t>(id) < regionClass.size() && regionClass[id] == cls ? 1 : 0;
    }
    return m;
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.width != gt.width || pred.height != gt.height) {
        throw DimensionError("confusion: prediction and ground truth differ in size");
    }
    ConfusionCounts c;
    for (size_t i = 0; i < pred.bits.size(); ++i) {
        const bool p = pred.bits[i] != 0;
        const bool g = gt.bits[i] != 0;
        if (p && g) {
            ++c.tp;
        } else if (p) {
            ++c.fp;
        } else if (g) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

Metrics metrics(const ConfusionCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) throw ParameterError("metrics: negative count");
    if (c.total() == 0) throw ParameterError("metrics: all counts are zero");
    Metrics m;
    auto ratio = [&](int64_t num, int64_t den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.sensitivity = ratio(c.tp, c.tp + c.fn);
    m.specificity = ratio(c.tn, c.tn + c.fp);
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.accuracy = ratio(c.tp + c.tn, c.total());
    return m;
}

std::vector<Metrics> evaluateRegions(const LabelMap& regions, const LabelMap& gt,
                                     const std::vector<BodyClass>& classes) {
    const std::vector<int> regionClass = assignClasses(regions, gt);
    std::vector<Metrics> out;
    for (BodyClass cls : classes) {
        const int id = static_cast<int>(cls);
        out.push_back(metrics(confusion(classMask(regions, regionClass, id), maskOf(gt, id))));
    }
    return out;
}

std::vector<MetricRecord> averageRecords(const std::vector<std::vector<Metrics>>& perFrame,
                                         const std::vector<BodyClass>& classes, std::string_view channels,
                                         int segments) {
    std::vector<MetricRecord> out;
    for (size_t c = 0; c < classes.size(); ++c) {
        MetricRecord r;
        r.cls = std::string(className(classes[c]));
        r.channels = std::string(channels);
        r.segments = segments;
        r.frames = static_cast<int>(perFrame.size());
        for (const auto& frame : perFrame) {
            const Metrics& m = frame[c];
            r.metrics.sensitivity += m.sensitivity;
            r.metrics.specificity += m.specificity;
            r.metrics.precision += m.precision;
            r.metrics.accuracy += m.accuracy;
            r.metrics.degenerate = r.metrics.degenerate || m.degenerate;
        }
        if (!perFrame.empty()) {
            const double n = static_cast<double>(perFrame.size());
            r.metrics.sensitivity /= n;
            r.metrics.specificity /= n;
            r.metrics.precision /= n;
            r.metrics.accuracy /= n;
        }
        out.push_back(r);
    }
    return out;
}

std::vector<MetricRecord> rocSweep(const std::vector<EvalFrame>& frames, const SweepConfig& config) {
    std::vector<const EvalFrame*> usable;
    for (const auto& f : frames) {
        if (f.gt.labels.empty()) {
            logMessage(LogLevel::Warn, "frame %s has no ground truth, skipped", f.name.c_str());
            continue;
        }
        if (f.gt.width != f.rgb.width() || f.gt.height != f.rgb.height()) {
            throw DimensionError("rocSweep: ground truth of " + f.name + " does not match its frame");
        }
        usable.push_back(&f);
    }
    if (usable.empty()) throw Error("rocSweep: no frame with ground truth");

    // (channel, count) -> per-class records
    std::map<std::pair<int, int>, std::vector<MetricRecord>> table;
    for (size_t ci = 0; ci < config.channels.size(); ++ci) {
        for (size_t ni = 0; ni < config.segmentCounts.size(); ++ni) {
            SlicParams slic = config.slic;
            slic.segmentCount = config.segmentCounts[ni];
            std::vector<std::vector<Metrics>> perFrame;
            for (const EvalFrame* f : usable) {
                const LabelMap regions = segmentAndMerge(f->rgb, slic, config.channels[ci]);
                perFrame.push_back(evaluateRegions(regions, f->gt, config.classes));
            }
            table[{static_cast<int>(ci), static_cast<int>(ni)}] =
                averageRecords(perFrame, config.classes, channelModeName(config.channels[ci]), slic.segmentCount);
        }
    }
    std::vector<MetricRecord> out;
    for (size_t k = 0; k < config.classes.size(); ++k) {
        for (const auto& [key, records] : table) out.push_back(records[k]);
    }
    return out;
}

std::string formatNumber(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string metricCsvHeader() {
    return "class,channels,segments,sensitivity,specificity,precision,accuracy,one_minus_specificity,frames,degenerate";
}

std::string metricCsvRow(const MetricRecord& r) {
    const Metrics& m = r.metrics;
    return r.cls + "," + r.channels + "," + std::to_string(r.segments) + "," + formatNumber(m.sensitivity) + "," +
           formatNumber(m.specificity) + "," + formatNumber(m.precision) + "," + formatNumber(m.accuracy) + "," +
           formatNumber(1.0 - m.specificity) + "," + std::to_string(r.frames) + "," + (m.degenerate ? "1" : "0");
}

// =============================================================================
// Timing
// =============================================================================

std::string_view methodName(Method m) {
    switch (m) {
    case Method::Slic: return "slic";
    case Method::Gb: return "gb";
    case Method::Qs: return "qs";
    }
    return "?";
}

Method parseMethod(std::string_view name) {
    if (name == "slic") return Method::Slic;
    if (name == "gb") return Method::Gb;
    if (name == "qs") return Method::Qs;
    throw ParameterError("unknown method '" + std::string(name) + "'");
}

LabelMap runMethod(Method m, const RasterImage& plane, const BenchConfig& config) {
    switch (m) {
    case Method::Slic: return slicSegment(plane, config.slic);
    case Method::Gb: return gbSegment(plane, config.gb);
    case Method::Qs: return qsSegment(plane, config.qs);
    }
    throw ParameterError("unknown method");
}

namespace {

std::string describeParameters(Method m, const BenchConfig& c) {
    switch (m) {
    case Method::Slic:
        return "segments=" + std::to_string(c.slic.segmentCount) + ";compactness=" +
               formatNumber(c.slic.compactness, 3) + ";iterations=" + std::to_string(c.slic.iterations);
    case Method::Gb:
        return "k=" + formatNumber(c.gb.scale, 3) + ";sigma=" + formatNumber(c.gb.sigma, 3) +
               ";min_size=" + std::to_string(c.gb.minSize);
    case Method::Qs:
        return "kernel=" + formatNumber(c.qs.kernelSize, 3) + ";max_dist=" + formatNumber(c.qs.maxDistance, 3) +
               ";ratio=" + formatNumber(c.qs.ratio, 3);
    }
    return {};
}

} // namespace

std::vector<TimingRecord> bench(const std::vector<Method>& methods, const std::vector<RasterImage>& frames,
                                const BenchConfig& config) {
    if (frames.empty()) throw ParameterError("bench: need at least one frame");
    if (config.repetitions < 3) throw ParameterError("bench: repetitions must be >= 3");

    std::vector<RasterImage> planes;
    for (const auto& f : frames) planes.push_back(channelImage(f, config.channels));

    std::vector<TimingRecord> out;
    for (Method m : methods) {
        TimingRecord r;
        r.method = m;
        r.width = frames.front().width();
        r.height = frames.front().height();
        r.repetitions = config.repetitions;
        r.parameters = describeParameters(m, config);
        double total = 0;
        for (const auto& plane : planes) {
            (void)runMethod(m, plane, config);  // warm-up
            for (int rep = 0; rep < config.repetitions; ++rep) {
                const auto start = std::chrono::steady_clock::now();
                const LabelMap labels = runMethod(m, plane, config);
                const auto stop = std::chrono::steady_clock::now();
                total += std::chrono::duration<double>(stop - start).count();
                ++r.runs;
            }
        }
        r.meanSeconds = total / r.runs;
        out.push_back(r);
    }
    return out;
}

std::string timingCsvHeader() {
    return "method,mean_seconds,width,height,repetitions,runs,parameters";
}

std::string timingCsvRow(const TimingRecord& r) {
    return std::string(methodName(r.method)) + "," + formatNumber(r.meanSeconds) + "," + std::to_string(r.width) +
           "," + std::to_string(r.height) + "," + std::to_string(r.repetitions) + "," + std::to_string(r.runs) + "," +
           r.parameters;
}

} // namespace rodseg
