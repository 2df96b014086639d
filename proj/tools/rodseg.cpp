// rodseg: command-line front end for segmentation, merging, descriptors,
// embedding, tracking, evaluation, timing, fixtures and the full pipeline.
//
// Exit codes: 0 success, 1 internal failure, 2 missing or unreadable input,
// 3 invalid arguments or configuration.

#include "rodseg/eval.hpp"
#include "rodseg/features.hpp"
#include "rodseg/fixture.hpp"
#include "rodseg/imgio.hpp"
#include "rodseg/log.hpp"
#include "rodseg/merge.hpp"
#include "rodseg/pipeline.hpp"
#include "rodseg/superpixel.hpp"
#include "rodseg/tracker.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace rodseg;
namespace fs = std::filesystem;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

std::vector<std::string> splitList(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> parseIntList(const std::string& s) {
    std::vector<int> out;
    for (const auto& item : splitList(s)) {
        try {
            size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ParameterError("not an integer: '" + item + "'");
        }
    }
    return out;
}

void requireInput(const fs::path& p) {
    if (!fs::exists(p)) throw MissingInputError("input not found: " + p.string());
}

void ensureParent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void writeLabels(const fs::path& p, const LabelMap& labels) {
    ensureParent(p);
    saveLabelMap(p, labels);
}

std::vector<BodyClass> parseClasses(const std::string& s) {
    std::vector<BodyClass> out;
    for (const auto& name : splitList(s)) out.push_back(parseClassName(name));
    if (out.empty()) throw ParameterError("no classes given");
    return out;
}

std::string metricTable(const std::vector<MetricRecord>& records) {
    std::string csv = metricCsvHeader() + "\n";
    for (const auto& r : records) csv += metricCsvRow(r) + "\n";
    return csv;
}

// -----------------------------------------------------------------------------
// Segmenter options shared by segment and bench
// -----------------------------------------------------------------------------

struct SegmenterOptions {
    BenchConfig config;
    std::string channels = "rgb";

    void add(CLI::App* cmd) {
        cmd->add_option("--segments", config.slic.segmentCount, "SLIC segment count")->capture_default_str();
        cmd->add_option("--compactness", config.slic.compactness, "SLIC compactness m")->capture_default_str();
        cmd->add_option("--iterations", config.slic.iterations, "SLIC iterations")->capture_default_str();
        cmd->add_option("--channels", channels, "rgb | hue | gray")->capture_default_str();
        cmd->add_option("--scale", config.gb.scale, "graph-based scale k")->capture_default_str();
        cmd->add_option("--sigma", config.gb.sigma, "graph-based smoothing sigma")->capture_default_str();
        cmd->add_option("--min-size", config.gb.minSize, "graph-based minimum component size")
            ->capture_default_str();
        cmd->add_option("--kernel", config.qs.kernelSize, "quick shift kernel size")->capture_default_str();
        cmd->add_option("--max-distance", config.qs.maxDistance, "quick shift link radius")->capture_default_str();
        cmd->add_option("--ratio", config.qs.ratio, "quick shift color/space ratio")->capture_default_str();
    }

    BenchConfig resolved() const {
        BenchConfig c = config;
        c.channels = parseChannelMode(channels);
        return c;
    }
};

// -----------------------------------------------------------------------------
// Subcommands
// -----------------------------------------------------------------------------

struct SegmentCmd {
    std::string method = "slic";
    SegmenterOptions seg;
    std::string in, out, stats;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("segment", "Over-segment one frame into superpixels");
        cmd->add_option("--method", method, "slic | gb | qs")->capture_default_str();
        seg.add(cmd);
        cmd->add_option("--in", in, "input frame (.png or .raw)")->required();
        cmd->add_option("--out", out, "label map PNG (ids from 1)")->required();
        cmd->add_option("--stats", stats, "per-superpixel CSV");
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const Method m = parseMethod(method);
        const BenchConfig cfg = seg.resolved();
        requireInput(in);
        const RasterImage plane = channelImage(loadFrame(in), cfg.channels);
        const LabelMap labels = runMethod(m, plane, cfg);
        LabelMap shifted = labels;
        for (auto& l : shifted.labels) ++l;
        shifted.clusterCount = labels.clusterCount + 1;
        const std::string csv = stats.empty() ? std::string() : superpixelCsv(computeStats(labels, plane));
        writeLabels(out, shifted);
        if (!stats.empty()) writeText(stats, csv);
        logMessage(LogLevel::Info, "%d superpixels", labels.clusterCount);
    }
};

struct MergeCmd {
    std::string labels, frame, channel = "hue", out, stats;
    MergeParams params;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("merge", "Merge adjacent superpixels of similar intensity");
        cmd->add_option("--labels", labels, "superpixel label map PNG")->required();
        cmd->add_option("--frame", frame, "frame the labels belong to")->required();
        cmd->add_option("--channel", channel, "hue | gray | rgbmean")->capture_default_str();
        cmd->add_option("--relative", params.relativeThreshold, "relative link threshold")->capture_default_str();
        cmd->add_option("--absolute", params.absoluteFraction, "absolute link threshold as a fraction of the range")
            ->capture_default_str();
        cmd->add_option("--out", out, "region mask PNG (ids from 1)")->required();
        cmd->add_option("--stats", stats, "per-region CSV");
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const ChannelMode mode = parseChannelMode(channel);
        requireInput(labels);
        requireInput(frame);
        const RasterImage rgb = loadFrame(frame);
        const LabelMap sp = compactLabels(loadMask(labels, std::make_pair(rgb.width(), rgb.height())));
        const RasterImage plane = channelImage(rgb, mode);
        MergedRegions merged = mergeRegions(computeStats(sp, plane), buildAdjacency(sp), intensityMax(mode), params);
        fillBoundingBoxes(merged, sp);
        const LabelMap mask = regionsToMask(merged, sp);
        writeLabels(out, mask);
        if (!stats.empty()) writeText(stats, regionCsv(merged));
        logMessage(LogLevel::Info, "%d superpixels -> %zu regions in %d rounds", sp.clusterCount,
                   merged.groups.size(), merged.rounds);
    }
};

struct FeaturesCmd {
    std::string regions, frame, gt, out;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("features", "28-value color and texture descriptor per region");
        cmd->add_option("--regions", regions, "region mask PNG")->required();
        cmd->add_option("--frame", frame, "frame the regions belong to")->required();
        cmd->add_option("--gt", gt, "ground-truth mask; fills the class column");
        cmd->add_option("--out", out, "features CSV")->required();
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        requireInput(regions);
        requireInput(frame);
        if (!gt.empty()) requireInput(gt);
        const RasterImage rgb = loadFrame(frame);
        const auto dims = std::make_pair(rgb.width(), rgb.height());
        const LabelMap mask = loadMask(regions, dims);
        std::vector<int> regionClass;
        if (!gt.empty()) regionClass = assignClasses(mask, loadMask(gt, dims));
        FeatureTable table;
        appendRegionFeatures(table, mask, makeChannelSet(rgb), regionClass);
        writeText(out, featureCsv(table));
    }
};

struct EmbedCmd {
    std::string in, out;
    TsneParams params;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("embed", "Two-dimensional t-SNE embedding of a features CSV");
        cmd->add_option("--in", in, "features CSV")->required();
        cmd->add_option("--out", out, "embedding CSV")->required();
        cmd->add_option("--perplexity", params.perplexity, "perplexity; 0 picks min(30, (N-1)/3)")
            ->capture_default_str();
        cmd->add_option("--iterations", params.iterations, "gradient steps")->capture_default_str();
        cmd->add_option("--seed", params.seed, "RNG seed for the initial layout")->required();
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        requireInput(in);
        const FeatureTable table = parseFeatureCsv(readText(in));
        std::vector<std::vector<double>> rows;
        for (const auto& v : table.values) rows.emplace_back(v.begin(), v.end());
        const TsneResult r = tsne(rows, params);
        logMessage(LogLevel::Info, "KL %.6f -> %.6f", r.initialKl, r.finalKl);
        writeText(out, embeddingCsv(table, r));
    }
};

struct TrackCmd {
    std::string frames, seed, channels = "hue", out;
    int segments = 1500;
    double compactness = 10.0;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("track", "Follow one seeded landmark through a frame sequence");
        cmd->add_option("--frames", frames, "directory of numbered frames")->required();
        cmd->add_option("--seed", seed, "X,Y position of the landmark in the first frame")->required();
        cmd->add_option("--channels", channels, "rgb | hue | gray")->capture_default_str();
        cmd->add_option("--segments", segments, "SLIC segment count per full frame")->capture_default_str();
        cmd->add_option("--compactness", compactness, "SLIC compactness m")->capture_default_str();
        cmd->add_option("--out", out, "JSONL track")->required();
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const std::vector<int> xy = parseIntList(seed);
        if (xy.size() != 2) throw ParameterError("--seed expects X,Y");
        TrackerParams p;
        p.channels = parseChannelMode(channels);
        p.slic.segmentCount = segments;
        p.slic.compactness = compactness;
        p.slic.validate();
        requireInput(frames);
        const auto files = listSequence(frames, "frame");
        if (files.empty()) throw MissingInputError("no frames in " + frames);

        std::string jsonl;
        std::optional<Tracker> tracker;
        int lostCount = 0;
        for (size_t i = 0; i < files.size(); ++i) {
            const RasterImage rgb = loadFrame(files[i]);
            if (!tracker) {
                tracker = Tracker::seeded(rgb, xy[0], xy[1], p);
                jsonl += trackJsonLine(tracker->state(), 0, false) + "\n";
                continue;
            }
            const StepResult r = tracker->step(rgb);
            lostCount += r.lost ? 1 : 0;
            jsonl += trackJsonLine(r.state, r.weight, r.lost) + "\n";
        }
        writeText(out, jsonl);
        logMessage(LogLevel::Info, "%zu frames, %d lost", files.size(), lostCount);
    }
};

struct EvalCmd {
    std::string pred, gt, frames, classes = "paw,body,tail", out;
    std::string channels = "rgb,hue,gray", segments = "500,1500,4500";
    int sample = 0;
    std::optional<uint64_t> seed;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("eval", "Pixel-level metrics against ground-truth masks");
        cmd->add_option("--pred", pred, "region masks (file or directory)");
        cmd->add_option("--frames", frames, "frames to segment under every sweep configuration");
        cmd->add_option("--gt", gt, "ground-truth masks (file or directory)")->required();
        cmd->add_option("--classes", classes, "comma-separated classes")->capture_default_str();
        cmd->add_option("--channels", channels, "sweep channel modes")->capture_default_str();
        cmd->add_option("--segments", segments, "sweep segment counts")->capture_default_str();
        cmd->add_option("--sample", sample, "evaluate this many randomly drawn frames (0: all)")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "RNG seed for frame sampling");
        cmd->add_option("--out", out, "metrics CSV")->required();
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const auto cls = parseClasses(classes);
        if (pred.empty() == frames.empty()) throw ParameterError("give exactly one of --pred or --frames");
        if (sample < 0) throw ParameterError("--sample must be >= 0");
        if (sample > 0 && !seed) throw ParameterError("--sample requires --seed");
        requireInput(gt);
        const std::string source = pred.empty() ? frames : pred;
        requireInput(source);
        const auto items = listSequence(source, pred.empty() ? "frame" : "regions");
        const auto truth = matchSequence(items, listSequence(gt, "gt"));

        std::vector<size_t> paired;
        for (size_t i = 0; i < items.size(); ++i) {
            if (truth[i].empty()) {
                logMessage(LogLevel::Warn, "no ground truth for %s, skipped", items[i].string().c_str());
                continue;
            }
            paired.push_back(i);
        }
        if (paired.empty()) throw MissingInputError("no ground-truth mask matches any input");
        std::vector<size_t> chosen;
        for (size_t k : sampleIndices(paired.size(), sample, seed.value_or(0))) chosen.push_back(paired[k]);

        if (!pred.empty()) {
            std::vector<std::vector<Metrics>> perFrame;
            for (size_t i : chosen) {
                const LabelMap mask = loadMask(items[i]);
                const LabelMap g = loadMask(truth[i], std::make_pair(mask.width, mask.height));
                perFrame.push_back(evaluateRegions(mask, g, cls));
            }
            writeText(out, metricTable(averageRecords(perFrame, cls, "regions", 0)));
            return;
        }

        SweepConfig sc;
        sc.classes = cls;
        sc.channels.clear();
        for (const auto& c : splitList(channels)) sc.channels.push_back(parseChannelMode(c));
        sc.segmentCounts = parseIntList(segments);
        if (sc.channels.empty() || sc.segmentCounts.empty()) throw ParameterError("empty sweep");
        std::vector<EvalFrame> evalFrames;
        for (size_t i : chosen) {
            EvalFrame f;
            f.rgb = loadFrame(items[i]);
            f.gt = loadMask(truth[i], std::make_pair(f.rgb.width(), f.rgb.height()));
            f.name = items[i].filename().string();
            evalFrames.push_back(std::move(f));
        }
        writeText(out, metricTable(rocSweep(evalFrames, sc)));
    }
};

struct BenchCmd {
    std::string methods = "slic,gb,qs";
    std::vector<std::string> frames;
    SegmenterOptions seg;
    std::string out;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("bench", "Mean segmentation wall-clock time per method");
        cmd->add_option("--methods", methods, "comma-separated methods")->capture_default_str();
        cmd->add_option("--frame", frames, "frame file or directory (repeatable)")->required();
        cmd->add_option("--reps", seg.config.repetitions, "timed runs per frame (>= 3)")->capture_default_str();
        seg.add(cmd);
        cmd->add_option("--out", out, "timing CSV")->required();
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        std::vector<Method> ms;
        for (const auto& m : splitList(methods)) ms.push_back(parseMethod(m));
        const BenchConfig cfg = seg.resolved();
        std::vector<fs::path> files;
        for (const auto& f : frames) {
            requireInput(f);
            for (auto& p : listSequence(f, "frame")) files.push_back(std::move(p));
        }
        std::vector<RasterImage> imgs;
        for (const auto& f : files) imgs.push_back(loadFrame(f));
        std::string csv = timingCsvHeader() + "\n";
        for (const auto& r : bench(ms, imgs, cfg)) csv += timingCsvRow(r) + "\n";
        writeText(out, csv);
    }
};

struct FixtureCmd {
    std::string kind = "textured-rodent-silhouette", out;
    FixtureParams params;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("fixture", "Write a synthetic frame sequence with exact ground truth");
        cmd->add_option("--kind", kind, "two-tone | blob-sequence | textured-rodent-silhouette")
            ->capture_default_str();
        cmd->add_option("--seed", params.seed, "RNG seed")->capture_default_str();
        cmd->add_option("--frames", params.frames, "frame count")->capture_default_str();
        cmd->add_option("--width", params.width, "width (0: kind default)");
        cmd->add_option("--height", params.height, "height (0: kind default)");
        cmd->add_option("--noise", params.noise, "per-channel noise amplitude")->capture_default_str();
        cmd->add_option("--radius", params.blobRadius, "blob radius")->capture_default_str();
        cmd->add_option("--step-x", params.stepX, "blob x step per frame")->capture_default_str();
        cmd->add_option("--step-y", params.stepY, "blob y step per frame")->capture_default_str();
        cmd->add_option("--max-step", params.maxStep, "random-walk step bound (0: constant velocity)")
            ->capture_default_str();
        cmd->add_option("--jump-frame", params.jumpFrame, "frame of a sudden jump (-1: none)")
            ->capture_default_str();
        cmd->add_option("--jump-size", params.jumpSize, "jump length in pixels")->capture_default_str();
        cmd->add_option("--out", out, "output directory")->required();
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        params.kind = parseFixtureKind(kind);
        writeFixture(makeFixture(params), out);
    }
};

struct PipelineCmd {
    std::string config;
    std::vector<std::string> inputs;
    std::string gt, output, channels, mergeChannel, method, stages;
    std::optional<uint64_t> seed;
    std::optional<int> segments;

    void add(CLI::App& app, std::function<void()>& run) {
        auto* cmd = app.add_subcommand("pipeline", "Run the configured stages end to end");
        cmd->add_option("--config", config, "JSON configuration")->required();
        cmd->add_option("--input", inputs, "frame file or directory (overrides 'input')");
        cmd->add_option("--gt", gt, "ground truth (overrides 'gt')");
        cmd->add_option("--output", output, "output directory (overrides 'output')");
        cmd->add_option("--seed", seed, "RNG seed (overrides 'seed')");
        cmd->add_option("--channels", channels, "segmentation channels (overrides 'channels')");
        cmd->add_option("--merge-channel", mergeChannel, "merge channel (overrides 'merge_channel')");
        cmd->add_option("--method", method, "segmenter (overrides 'segmenter.method')");
        cmd->add_option("--segments", segments, "SLIC segment count (overrides 'segmenter.segments')");
        cmd->add_option("--stages", stages, "comma-separated stages (overrides 'stages')");
        cmd->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        PipelineConfig c = parseConfig(readText(config));
        if (!inputs.empty()) c.inputs.assign(inputs.begin(), inputs.end());
        if (!gt.empty()) c.gt = gt;
        if (!output.empty()) c.output = output;
        if (seed) c.seed = seed;
        if (!channels.empty()) c.channels = parseChannelMode(channels);
        if (!mergeChannel.empty()) c.mergeChannel = parseChannelMode(mergeChannel);
        if (!method.empty()) c.method = parseMethod(method);
        if (segments) c.slic.segmentCount = *segments;
        if (!stages.empty()) {
            c.stages.clear();
            for (const auto& s : splitList(stages)) c.stages.push_back(parseStage(s));
        }
        const PipelineResult r = runPipeline(c);
        logMessage(LogLevel::Info, "%d frames, %zu artifacts in %s", r.frames, r.artifacts.size(),
                   c.output.string().c_str());
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superpixel segmentation, tracking and evaluation for rodent locomotion video"};
    app.require_subcommand(1);

    std::function<void()> run;
    SegmentCmd segment;
    MergeCmd merge;
    FeaturesCmd features;
    EmbedCmd embed;
    TrackCmd track;
    EvalCmd eval;
    BenchCmd benchCmd;
    FixtureCmd fixture;
    PipelineCmd pipeline;
    segment.add(app, run);
    merge.add(app, run);
    features.add(app, run);
    embed.add(app, run);
    track.add(app, run);
    eval.add(app, run);
    benchCmd.add(app, run);
    fixture.add(app, run);
    pipeline.add(app, run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        run();
        return 0;
    } catch (const MissingInputError& e) {
        logMessage(LogLevel::Error, "%s", e.what());
        return kExitInput;
    } catch (const IngestError& e) {
        logMessage(LogLevel::Error, "%s", e.what());
        return kExitInput;
    } catch (const DimensionError& e) {
        logMessage(LogLevel::Error, "%s", e.what());
        return kExitInput;
    } catch (const LayoutError& e) {
        logMessage(LogLevel::Error, "%s", e.what());
        return kExitInput;
    } catch (const ConfigError& e) {
        logMessage(LogLevel::Error, "%s", e.what());
        return kExitConfig;
    } catch (const ParameterError& e) {
        logMessage(LogLevel::Error, "%s", e.what());
        return kExitConfig;
    } catch (const SeedError& e) {
        logMessage(LogLevel::Error, "%s", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        logMessage(LogLevel::Error, "internal failure: %s", e.what());
        return kExitInternal;
    }
}
