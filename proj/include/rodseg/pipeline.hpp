/**
 * @file pipeline.hpp
 * @brief End-to-end orchestration (segment, merge, overlay, features, embed,
 *        track, eval), its JSON configuration, and the CSV/JSONL artifact
 *        formats shared with the command-line tool.
 *
 * Frame sequences are directories of numbered image files. When a directory
 * holds files named `frame*`, only those are frames; ground-truth files are
 * looked up by the trailing frame number (`gt_0007.png` for `frame_0007.png`).
 */

#pragma once

#include "rodseg/eval.hpp"
#include "rodseg/features.hpp"
#include "rodseg/merge.hpp"
#include "rodseg/superpixel.hpp"
#include "rodseg/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rodseg {

/// A referenced input file or directory does not exist.
class MissingInputError : public Error {
public:
    using Error::Error;
};

/// The configuration document is malformed or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

// =============================================================================
// Sequences
// =============================================================================

/// Trailing decimal number of the file stem, or -1.
int frameNumber(const std::filesystem::path& path);

/**
 * Image files (.png, .raw) of a directory in name order. Files whose name
 * starts with `prefix` are preferred; without any, every image file is
 * returned. A regular file is returned as a one-element sequence.
 */
std::vector<std::filesystem::path> listSequence(const std::filesystem::path& path, const std::string& prefix);

/**
 * Pairs every item with a partner: by trailing frame number when both carry
 * one, otherwise by position. Items without a partner get an empty path.
 */
std::vector<std::filesystem::path> matchSequence(const std::vector<std::filesystem::path>& items,
                                                 const std::vector<std::filesystem::path>& partners);

/// Seeded subset of `count` indices out of [0, n), in ascending order. count <= 0 or >= n keeps all.
std::vector<size_t> sampleIndices(size_t n, int count, uint64_t seed);

// =============================================================================
// Artifact formats
// =============================================================================

/// `id,size,cx,cy,intensity`; ids are label + 1, matching the saved label map.
std::string superpixelCsv(const SuperpixelStats& stats);

/// `id,size,cx,cy,intensity,min_x,min_y,max_x,max_y,superpixels`; ids are mask values.
std::string regionCsv(const MergedRegions& regions);

/// Key columns followed by the 28 descriptor columns.
struct FeatureTable {
    std::vector<std::string> keyColumns;
    std::vector<std::vector<std::string>> keys;
    std::vector<FeatureVector> values;
};

/// Descriptor column names: four color means, then six statistics at each angle.
std::vector<std::string> featureColumnNames();

/**
 * One row per nonzero region id of `regions`. The class column holds the
 * majority ground-truth class name when `regionClass` is non-empty and is
 * left blank otherwise. A non-negative `frame` adds a leading frame column.
 */
void appendRegionFeatures(FeatureTable& table, const LabelMap& regions, const ChannelSet& channels,
                          const std::vector<int>& regionClass, int frame = -1);

std::string featureCsv(const FeatureTable& table);
FeatureTable parseFeatureCsv(const std::string& text);

/// Key columns followed by `x,y` of the 2-D embedding.
std::string embeddingCsv(const FeatureTable& table, const TsneResult& result);

/// One tracker record as a single JSON line (no trailing newline).
std::string trackJsonLine(const TrackState& state, int weight, bool lost);

/// Reads a whole file; throws MissingInputError when it cannot be opened.
std::string readText(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void writeText(const std::filesystem::path& path, const std::string& text);

// =============================================================================
// Configuration
// =============================================================================

enum class Stage { Segment, Merge, Overlay, Features, Embed, Track, Eval };

std::string_view stageName(Stage s);
Stage parseStage(std::string_view name);

struct PipelineConfig {
    std::vector<std::filesystem::path> inputs;  // frame files or directories
    std::filesystem::path gt;                    // optional mask file or directory
    std::filesystem::path output;
    std::optional<uint64_t> seed;

    ChannelMode channels = ChannelMode::Rgb;
    std::optional<ChannelMode> mergeChannel;  // defaults to `channels`
    Method method = Method::Slic;
    SlicParams slic;
    GbParams gb;
    QsParams qs;
    MergeParams merge;

    std::vector<Stage> stages = {Stage::Segment, Stage::Merge, Stage::Overlay};

    TsneParams tsne;  // seed is taken from `seed`

    std::vector<std::pair<int, int>> trackSeeds;
    ChannelMode trackChannels = ChannelMode::Hue;
    int trackSegments = 1500;

    std::vector<BodyClass> classes = {BodyClass::Paw, BodyClass::Body, BodyClass::Tail};
    int evalSample = 0;  // frames drawn for evaluation; 0 keeps all
    bool sweep = false;
    std::vector<ChannelMode> sweepChannels = {ChannelMode::Rgb, ChannelMode::Hue, ChannelMode::Gray};
    std::vector<int> sweepSegments = {500, 1500, 4500};

    bool has(Stage s) const;
    ChannelMode effectiveMergeChannel() const { return mergeChannel.value_or(channels); }

    /// Structural checks (ConfigError) and parameter ranges (ParameterError).
    void validate() const;

    /// Throws MissingInputError for any referenced path that does not exist.
    void checkInputs() const;
};

/**
 * Parses a JSON document. Unknown keys are rejected so that typos surface
 * as configuration errors rather than silently applied defaults.
 */
PipelineConfig parseConfig(const std::string& json);

struct PipelineResult {
    std::vector<std::filesystem::path> artifacts;  // in write order
    int frames = 0;
};

/**
 * Validates the configuration, checks every input before anything is
 * written, then runs the requested stages. Each frame is processed
 * independently through segment, merge, overlay and features; embedding,
 * tracking and evaluation follow over the whole sequence.
 */
PipelineResult runPipeline(const PipelineConfig& config);

} // namespace rodseg
