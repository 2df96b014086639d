#include "rodseg/pipeline.hpp"

#include "rodseg/fixture.hpp"
#include "rodseg/imgio.hpp"
#include "rodseg/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace rodseg {

namespace fs = std::filesystem;
using nlohmann::json;

// =============================================================================
// Sequences
// =============================================================================

int frameNumber(const fs::path& path) {
    const std::string stem = path.stem().string();
    size_t start = stem.size();
    while (start > 0 && std::isdigit(static_cast<unsigned char>(stem[start - 1]))) --start;
    if (start == stem.size() || stem.size() - start > 9) return -1;
    return std::stoi(stem.substr(start));
}

namespace {

bool isImageFile(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".raw";
}

} // namespace

std::vector<fs::path> listSequence(const fs::path& path, const std::string& prefix) {
    if (fs::is_regular_file(path)) return {path};
    if (!fs::is_directory(path)) throw MissingInputError("input not found: " + path.string());
    std::vector<fs::path> all;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && isImageFile(entry.path())) all.push_back(entry.path());
    }
    std::sort(all.begin(), all.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    std::vector<fs::path> preferred;
    for (const auto& p : all) {
        if (!prefix.empty() && p.filename().string().rfind(prefix, 0) == 0) preferred.push_back(p);
    }
    return preferred.empty() ? all : preferred;
}

std::vector<fs::path> matchSequence(const std::vector<fs::path>& items, const std::vector<fs::path>& partners) {
    std::map<int, fs::path> byNumber;
    for (const auto& p : partners) {
        const int n = frameNumber(p);
        if (n >= 0) byNumber.emplace(n, p);
    }
    std::vector<fs::path> out(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        const int n = frameNumber(items[i]);
        if (n >= 0 && byNumber.count(n)) {
            out[i] = byNumber[n];
        } else if (i < partners.size() && partners.size() == items.size() &&
                   (n < 0 || frameNumber(partners[i]) < 0)) {
            out[i] = partners[i];
        }
    }
    return out;
}

std::vector<size_t> sampleIndices(size_t n, int count, uint64_t seed) {
    std::vector<size_t> all(n);
    std::iota(all.begin(), all.end(), size_t{0});
    if (count <= 0 || static_cast<size_t>(count) >= n) return all;
    std::vector<size_t> picked;
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), static_cast<size_t>(count), rng);
    return picked;
}

// =============================================================================
// Artifact formats
// =============================================================================

namespace {

std::string joinCsv(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

std::vector<std::string> splitCsv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string formatFeature(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

std::string superpixelCsv(const SuperpixelStats& stats) {
    std::string out = "id,size,cx,cy,intensity\n";
    for (size_t i = 0; i < stats.items.size(); ++i) {
        const auto& s = stats.items[i];
        out += std::to_string(i + 1) + "," + std::to_string(s.size) + "," + formatNumber(s.cx, 4) + "," +
               formatNumber(s.cy, 4) + "," + formatNumber(s.intensity, 4) + "\n";
    }
    return out;
}

std::string regionCsv(const MergedRegions& regions) {
    std::string out = "id,size,cx,cy,intensity,min_x,min_y,max_x,max_y,superpixels\n";
    for (size_t g = 0; g < regions.groups.size(); ++g) {
        const Region& r = regions.groups[g];
        std::string members;
        for (size_t k = 0; k < r.members.size(); ++k) {
            if (k) members += ' ';
            members += std::to_string(r.members[k] + 1);
        }
        out += std::to_string(g + 1) + "," + std::to_string(r.size) + "," + formatNumber(r.cx, 4) + "," +
               formatNumber(r.cy, 4) + "," + formatNumber(r.intensity, 4) + "," + std::to_string(r.minX) + "," +
               std::to_string(r.minY) + "," + std::to_string(r.maxX) + "," + std::to_string(r.maxY) + "," +
               members + "\n";
    }
    return out;
}

std::vector<std::string> featureColumnNames() {
    std::vector<std::string> names = {"gray_mean", "green_mean", "sat_mean", "hue_mean"};
    const char* stats[] = {"contrast", "dissimilarity", "homogeneity", "asm", "energy", "correlation"};
    for (const char* angle : {"0", "45", "90", "135"}) {
        for (const char* s : stats) names.push_back(std::string(s) + "_" + angle);
    }
    return names;
}

void appendRegionFeatures(FeatureTable& table, const LabelMap& regions, const ChannelSet& channels,
                          const std::vector<int>& regionClass, int frame) {
    if (regions.width != channels.gray.width() || regions.height != channels.gray.height()) {
        throw DimensionError("features: regions and frame differ in size");
    }
    std::vector<std::string> columns;
    if (frame >= 0) columns.push_back("frame");
    columns.push_back("region");
    columns.push_back("class");
    if (table.keyColumns.empty()) table.keyColumns = columns;
    if (table.keyColumns != columns) throw Error("features: inconsistent key columns");

    struct Box {
        int x0 = INT32_MAX, y0 = INT32_MAX, x1 = -1, y1 = -1;
    };
    std::map<int, Box> boxes;
    for (int y = 0; y < regions.height; ++y) {
        for (int x = 0; x < regions.width; ++x) {
            const int id = regions.at(x, y);
            if (id <= 0) continue;
            Box& b = boxes[id];
            b.x0 = std::min(b.x0, x);
            b.y0 = std::min(b.y0, y);
            b.x1 = std::max(b.x1, x);
            b.y1 = std::max(b.y1, y);
        }
    }
    // Descriptors only see region pixels, so each region is described on its bounding-box crop.
    for (const auto& [id, b] : boxes) {
        const int w = b.x1 - b.x0 + 1;
        const int h = b.y1 - b.y0 + 1;
        BinaryMask mask(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) mask.set(x, y, regions.at(b.x0 + x, b.y0 + y) == id);
        }
        ChannelSet crop;
        crop.gray = cropImage(channels.gray, b.x0, b.y0, w, h);
        crop.green = cropImage(channels.green, b.x0, b.y0, w, h);
        crop.hue = cropImage(channels.hue, b.x0, b.y0, w, h);
        crop.sat = cropImage(channels.sat, b.x0, b.y0, w, h);

        std::vector<std::string> key;
        if (frame >= 0) key.push_back(std::to_string(frame));
        key.push_back(std::to_string(id));
        if (!regionClass.empty() && static_cast<size_t>(id) < regionClass.size()) {
            key.emplace_back(className(static_cast<BodyClass>(regionClass[id])));
        } else {
            key.emplace_back();
        }
        table.keys.push_back(std::move(key));
        table.values.push_back(featureVector(mask, crop));
    }
}

std::string featureCsv(const FeatureTable& table) {
    std::vector<std::string> header = table.keyColumns;
    for (auto& n : featureColumnNames()) header.push_back(n);
    std::string out = joinCsv(header) + "\n";
    for (size_t r = 0; r < table.values.size(); ++r) {
        std::vector<std::string> cells = table.keys[r];
        for (double v : table.values[r]) cells.push_back(formatFeature(v));
        out += joinCsv(cells) + "\n";
    }
    return out;
}

FeatureTable parseFeatureCsv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw IngestError("features: empty file");
    const auto header = splitCsv(line);
    if (header.size() < static_cast<size_t>(kFeatureCount)) {
        throw IngestError("features: expected at least 28 columns");
    }
    const size_t nKeys = header.size() - kFeatureCount;
    FeatureTable t;
    t.keyColumns.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(nKeys));
    int lineNo = 1;
    while (std::getline(ss, line)) {
        ++lineNo;
        if (line.empty()) continue;
        const auto cells = splitCsv(line);
        if (cells.size() != header.size()) {
            throw IngestError("features: line " + std::to_string(lineNo) + " has " + std::to_string(cells.size()) +
                              " columns, expected " + std::to_string(header.size()));
        }
        t.keys.emplace_back(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(nKeys));
        FeatureVector v{};
        for (int k = 0; k < kFeatureCount; ++k) {
            const std::string& c = cells[nKeys + k];
            char* end = nullptr;
            v[k] = std::strtod(c.c_str(), &end);
            if (c.empty() || *end != '\0' || !std::isfinite(v[k])) {
                throw IngestError("features: line " + std::to_string(lineNo) + ": bad number '" + c + "'");
            }
        }
        t.values.push_back(v);
    }
    return t;
}

std::string embeddingCsv(const FeatureTable& table, const TsneResult& result) {
    if (result.embedding.size() != table.keys.size()) throw Error("embedding: row count mismatch");
    std::vector<std::string> header = table.keyColumns;
    header.push_back("x");
    header.push_back("y");
    std::string out = joinCsv(header) + "\n";
    for (size_t r = 0; r < table.keys.size(); ++r) {
        std::vector<std::string> cells = table.keys[r];
        cells.push_back(formatNumber(result.embedding[r][0]));
        cells.push_back(formatNumber(result.embedding[r][1]));
        out += joinCsv(cells) + "\n";
    }
    return out;
}

std::string trackJsonLine(const TrackState& s, int weight, bool lost) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"frame\":%d,\"x\":%.3f,\"y\":%.3f,\"region_size\":%lld,\"hue\":%.3f,\"sat\":%.3f,"
                  "\"gray\":%.3f,\"weight\":%d,\"lost\":%s}",
                  s.frame, s.x, s.y, static_cast<long long>(s.size), s.hue, s.sat, s.gray, weight,
                  lost ? "true" : "false");
    return buf;
}

std::string readText(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeText(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

// =============================================================================
// Configuration
// =============================================================================

std::string_view stageName(Stage s) {
    switch (s) {
    case Stage::Segment: return "segment";
    case Stage::Merge: return "merge";
    case Stage::Overlay: return "overlay";
    case Stage::Features: return "features";
    case Stage::Embed: return "embed";
    case Stage::Track: return "track";
    case Stage::Eval: return "eval";
    }
    return "?";
}

Stage parseStage(std::string_view name) {
    for (Stage s : {Stage::Segment, Stage::Merge, Stage::Overlay, Stage::Features, Stage::Embed, Stage::Track,
                    Stage::Eval}) {
        if (stageName(s) == name) return s;
    }
    throw ConfigError("unknown stage '" + std::string(name) + "'");
}

bool PipelineConfig::has(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

void PipelineConfig::validate() const {
    if (inputs.empty()) throw ConfigError("config: 'input' is required");
    if (output.empty()) throw ConfigError("config: 'output' is required");
    if (stages.empty()) throw ConfigError("config: no stages requested");
    const bool merged = has(Stage::Merge);
    if (merged && !has(Stage::Segment)) throw ConfigError("config: 'merge' requires 'segment'");
    for (Stage s : {Stage::Overlay, Stage::Features, Stage::Eval}) {
        if (has(s) && !merged) throw ConfigError("config: '" + std::string(stageName(s)) + "' requires 'merge'");
    }
    if (has(Stage::Embed) && !has(Stage::Features)) throw ConfigError("config: 'embed' requires 'features'");
    if (has(Stage::Embed) && !seed) throw ConfigError("config: 'embed' requires 'seed'");
    if (has(Stage::Eval) && gt.empty()) throw ConfigError("config: 'eval' requires 'gt'");
    if (has(Stage::Eval) && evalSample > 0 && !seed) throw ConfigError("config: frame sampling requires 'seed'");
    if (has(Stage::Track) && trackSeeds.empty()) throw ConfigError("config: 'track' requires at least one seed");

    slic.validate();
    gb.validate();
    qs.validate();
    if (!(merge.relativeThreshold > 0) || !(merge.absoluteFraction > 0) || merge.absoluteFraction > 1) {
        throw ParameterError("merge thresholds must be positive (absolute fraction <= 1)");
    }
    if (tsne.iterations < 1 || tsne.perplexity < 0) throw ParameterError("embed: invalid iterations or perplexity");
    if (trackSegments < 1) throw ParameterError("track: segments must be positive");
    if (classes.empty()) throw ConfigError("config: eval classes are empty");
    if (evalSample < 0) throw ParameterError("eval: sample must be >= 0");
    if (sweep && (sweepChannels.empty() || sweepSegments.empty())) throw ConfigError("config: empty sweep");
    for (int n : sweepSegments) {
        if (n < 1) throw ParameterError("eval: sweep segment counts must be positive");
    }
}

void PipelineConfig::checkInputs() const {
    for (const auto& in : inputs) {
        if (!fs::exists(in)) throw MissingInputError("input not found: " + in.string());
        if (listSequence(in, "frame").empty()) throw MissingInputError("no frames in " + in.string());
    }
    if (!gt.empty() && !fs::exists(gt)) throw MissingInputError("ground truth not found: " + gt.string());
}

namespace {

void requireKeys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known) throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
void readIf(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

ChannelMode channelOf(const json& v) { return parseChannelMode(v.get<std::string>()); }

} // namespace

PipelineConfig parseConfig(const std::string& text) {
    PipelineConfig c;
    try {
        const json j = json::parse(text);
        requireKeys(j,
                    {"input", "gt", "output", "seed", "channels", "merge_channel", "stages", "segmenter", "merge",
                     "embed", "track", "eval"},
                    "config");
        if (j.contains("input")) {
            const json& in = j.at("input");
            if (in.is_array()) {
                for (const auto& p : in) c.inputs.emplace_back(p.get<std::string>());
            } else {
                c.inputs.emplace_back(in.get<std::string>());
            }
        }
        if (j.contains("gt")) c.gt = j.at("gt").get<std::string>();
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_unsigned()) throw ConfigError("config: 'seed' must be a non-negative integer");
            c.seed = j.at("seed").get<uint64_t>();
        }
        if (j.contains("channels")) c.channels = channelOf(j.at("channels"));
        if (j.contains("merge_channel")) c.mergeChannel = channelOf(j.at("merge_channel"));
        if (j.contains("stages")) {
            c.stages.clear();
            for (const auto& s : j.at("stages")) c.stages.push_back(parseStage(s.get<std::string>()));
        }
        if (j.contains("segmenter")) {
            const json& s = j.at("segmenter");
            requireKeys(s,
                        {"method", "segments", "compactness", "iterations", "gb_scale", "gb_sigma", "gb_min_size",
                         "qs_kernel", "qs_max_distance", "qs_ratio"},
                        "segmenter");
            if (s.contains("method")) c.method = parseMethod(s.at("method").get<std::string>());
            readIf(s, "segments", c.slic.segmentCount);
            readIf(s, "compactness", c.slic.compactness);
            readIf(s, "iterations", c.slic.iterations);
            readIf(s, "gb_scale", c.gb.scale);
            readIf(s, "gb_sigma", c.gb.sigma);
            readIf(s, "gb_min_size", c.gb.minSize);
            readIf(s, "qs_kernel", c.qs.kernelSize);
            readIf(s, "qs_max_distance", c.qs.maxDistance);
            readIf(s, "qs_ratio", c.qs.ratio);
        }
        if (j.contains("merge")) {
            const json& m = j.at("merge");
            requireKeys(m, {"relative_threshold", "absolute_fraction"}, "merge");
            readIf(m, "relative_threshold", c.merge.relativeThreshold);
            readIf(m, "absolute_fraction", c.merge.absoluteFraction);
        }
        if (j.contains("embed")) {
            const json& e = j.at("embed");
            requireKeys(e, {"perplexity", "iterations"}, "embed");
            readIf(e, "perplexity", c.tsne.perplexity);
            readIf(e, "iterations", c.tsne.iterations);
        }
        if (j.contains("track")) {
            const json& t = j.at("track");
            requireKeys(t, {"seeds", "channels", "segments"}, "track");
            if (t.contains("seeds")) {
                for (const auto& s : t.at("seeds")) {
                    if (!s.is_array() || s.size() != 2) throw ConfigError("config: track seeds are [x, y] pairs");
                    c.trackSeeds.emplace_back(s[0].get<int>(), s[1].get<int>());
                }
            }
            if (t.contains("channels")) c.trackChannels = channelOf(t.at("channels"));
            readIf(t, "segments", c.trackSegments);
        }
        if (j.contains("eval")) {
            const json& e = j.at("eval");
            requireKeys(e, {"classes", "sample", "sweep", "sweep_channels", "sweep_segments"}, "eval");
            if (e.contains("classes")) {
                c.classes.clear();
                for (const auto& s : e.at("classes")) c.classes.push_back(parseClassName(s.get<std::string>()));
            }
            readIf(e, "sample", c.evalSample);
            readIf(e, "sweep", c.sweep);
            if (e.contains("sweep_channels")) {
                c.sweepChannels.clear();
                for (const auto& s : e.at("sweep_channels")) c.sweepChannels.push_back(channelOf(s));
            }
            readIf(e, "sweep_segments", c.sweepSegments);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

// =============================================================================
// Orchestration
// =============================================================================

namespace {

class ArtifactWriter {
public:
    ArtifactWriter(fs::path root, PipelineResult& result) : root_(std::move(root)), result_(result) {}

    fs::path path(const std::string& name) const { return root_ / name; }

    void text(const std::string& name, const std::string& content) {
        writeText(path(name), content);
        record(name);
    }
    void png(const std::string& name, const RasterImage& img) {
        writePng(path(name), img);
        record(name);
    }
    void labels(const std::string& name, const LabelMap& labels) {
        saveLabelMap(path(name), labels);
        record(name);
    }

private:
    void record(const std::string& name) {
        logMessage(LogLevel::Debug, "wrote %s", path(name).string().c_str());
        result_.artifacts.push_back(path(name));
    }

    fs::path root_;
    PipelineResult& result_;
};

/// Frame numbers used in artifact names: the input's own numbering when it is unique, else positions.
std::vector<int> artifactIndices(const std::vector<fs::path>& frames) {
    std::vector<int> idx;
    std::set<int> seen;
    for (const auto& f : frames) {
        const int n = frameNumber(f);
        if (n < 0 || !seen.insert(n).second) {
            idx.resize(frames.size());
            std::iota(idx.begin(), idx.end(), 0);
            return idx;
        }
        idx.push_back(n);
    }
    return idx;
}

LabelMap shiftedLabels(const LabelMap& labels) {
    LabelMap out = labels;
    for (auto& l : out.labels) ++l;
    out.clusterCount = labels.clusterCount + 1;
    return out;
}

} // namespace

PipelineResult runPipeline(const PipelineConfig& config) {
    config.validate();
    config.checkInputs();

    std::vector<fs::path> frames;
    for (const auto& in : config.inputs) {
        for (auto& f : listSequence(in, "frame")) frames.push_back(std::move(f));
    }
    std::vector<fs::path> gtPaths(frames.size());
    if (!config.gt.empty()) gtPaths = matchSequence(frames, listSequence(config.gt, "gt"));

    const bool multi = frames.size() > 1;
    const std::vector<int> indices = artifactIndices(frames);
    auto name = [&](const char* base, size_t i, const char* ext) {
        return multi ? numberedName(base, indices[i], ext) : std::string(base) + ext;
    };

    std::vector<size_t> evalFrames;
    if (config.has(Stage::Eval)) {
        std::vector<size_t> withGt;
        for (size_t i = 0; i < frames.size(); ++i) {
            if (!gtPaths[i].empty()) withGt.push_back(i);
        }
        if (withGt.empty()) throw MissingInputError("no ground-truth mask matches any frame");
        for (size_t k : sampleIndices(withGt.size(), config.evalSample, config.seed.value_or(0))) {
            evalFrames.push_back(withGt[k]);
        }
    }

    PipelineResult result;
    result.frames = static_cast<int>(frames.size());
    fs::create_directories(config.output);
    ArtifactWriter out(config.output, result);

    const ChannelMode mergeChannel = config.effectiveMergeChannel();
    BenchConfig segmenter;
    segmenter.slic = config.slic;
    segmenter.gb = config.gb;
    segmenter.qs = config.qs;

    FeatureTable features;
    std::vector<std::vector<Metrics>> perFrame;
    for (size_t i = 0; i < frames.size() && config.has(Stage::Segment); ++i) {
        logMessage(LogLevel::Info, "frame %zu/%zu: %s", i + 1, frames.size(), frames[i].string().c_str());
        const RasterImage rgb = loadFrame(frames[i]);
        const RasterImage plane = channelImage(rgb, config.channels);
        const LabelMap labels = runMethod(config.method, plane, segmenter);
        out.labels(name("labels", i, ".png"), shiftedLabels(labels));
        out.text(name("superpixels", i, ".csv"), superpixelCsv(computeStats(labels, plane)));
        if (!config.has(Stage::Merge)) continue;

        const RasterImage mergePlane = channelImage(rgb, mergeChannel);
        const SuperpixelStats stats = computeStats(labels, mergePlane);
        MergedRegions merged = mergeRegions(stats, buildAdjacency(labels), intensityMax(mergeChannel), config.merge);
        fillBoundingBoxes(merged, labels);
        const LabelMap mask = regionsToMask(merged, labels);
        out.labels(name("regions", i, ".png"), mask);
        out.text(name("regions", i, ".csv"), regionCsv(merged));

        LabelMap gt;
        std::vector<int> regionClass;
        if (!gtPaths[i].empty()) {
            gt = loadMask(gtPaths[i], std::make_pair(rgb.width(), rgb.height()));
            regionClass = assignClasses(mask, gt);
        }
        if (config.has(Stage::Overlay)) out.png(name("overlay", i, ".png"), renderOverlay(rgb, mask, regionClass));
        if (config.has(Stage::Features)) {
            appendRegionFeatures(features, mask, makeChannelSet(rgb), regionClass, indices[i]);
        }
        if (std::find(evalFrames.begin(), evalFrames.end(), i) != evalFrames.end()) {
            perFrame.push_back(evaluateRegions(mask, gt, config.classes));
        }
    }

    if (config.has(Stage::Features)) out.text("features.csv", featureCsv(features));

    if (config.has(Stage::Embed)) {
        std::vector<std::vector<double>> rows;
        for (const auto& v : features.values) rows.emplace_back(v.begin(), v.end());
        TsneParams tp = config.tsne;
        tp.seed = *config.seed;
        const TsneResult emb = tsne(rows, tp);
        logMessage(LogLevel::Info, "t-SNE KL %.6f -> %.6f", emb.initialKl, emb.finalKl);
        out.text("embedding.csv", embeddingCsv(features, emb));
    }

    if (config.has(Stage::Eval)) {
        const int segments = config.method == Method::Slic ? config.slic.segmentCount : 0;
        std::string csv = metricCsvHeader() + "\n";
        for (const auto& r : averageRecords(perFrame, config.classes, channelModeName(config.channels), segments)) {
            csv += metricCsvRow(r) + "\n";
        }
        out.text("metrics.csv", csv);

        if (config.sweep) {
            std::vector<EvalFrame> sweepFrames;
            for (size_t i : evalFrames) {
                EvalFrame f;
                f.rgb = loadFrame(frames[i]);
                f.gt = loadMask(gtPaths[i], std::make_pair(f.rgb.width(), f.rgb.height()));
                f.name = frames[i].filename().string();
                sweepFrames.push_back(std::move(f));
            }
            SweepConfig sc;
            sc.channels = config.sweepChannels;
            sc.segmentCounts = config.sweepSegments;
            sc.classes = config.classes;
            sc.slic = config.slic;
            std::string roc = metricCsvHeader() + "\n";
            for (const auto& r : rocSweep(sweepFrames, sc)) roc += metricCsvRow(r) + "\n";
            out.text("roc.csv", roc);
        }
    }

    if (config.has(Stage::Track)) {
        TrackerParams tp;
        tp.slic = config.slic;
        tp.slic.segmentCount = config.trackSegments;
        tp.channels = config.trackChannels;
        std::vector<Tracker> trackers;
        std::vector<std::string> lines(config.trackSeeds.size());
        for (size_t i = 0; i < frames.size(); ++i) {
            const RasterImage rgb = loadFrame(frames[i]);
            if (i == 0) {
                for (size_t k = 0; k < config.trackSeeds.size(); ++k) {
                    const auto [x, y] = config.trackSeeds[k];
                    trackers.push_back(Tracker::seeded(rgb, x, y, tp));
                    lines[k] += trackJsonLine(trackers[k].state(), 0, false) + "\n";
                }
                continue;
            }
            for (size_t k = 0; k < trackers.size(); ++k) {
                const StepResult r = trackers[k].step(rgb);
                lines[k] += trackJsonLine(r.state, r.weight, r.lost) + "\n";
            }
        }
        for (size_t k = 0; k < lines.size(); ++k) {
            out.text(lines.size() > 1 ? numberedName("track", static_cast<int>(k), ".jsonl") : "track.jsonl",
                     lines[k]);
        }
    }
    return result;
}

} // namespace rodseg
