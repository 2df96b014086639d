#include "rodseg/fixture.hpp"
#include "rodseg/pipeline.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rodseg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rodseg_pipeline_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void touch(const fs::path& p) { std::ofstream(p) << "x"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Sequence, FrameNumber) {
    EXPECT_EQ(frameNumber("dir/frame_0042.png"), 42);
    EXPECT_EQ(frameNumber("gt7.png"), 7);
    EXPECT_EQ(frameNumber("regions.png"), -1);
}

TEST(Sequence, ListingPrefersPrefixAndSorts) {
    const fs::path d = scratch("list");
    for (const char* n : {"frame_0002.png", "frame_0000.png", "gt_0000.png", "notes.txt", "frame_0001.raw"}) {
        touch(d / n);
    }
    const auto frames = listSequence(d, "frame");
    ASSERT_EQ(frames.size(), 3u);
    EXPECT_EQ(frames[0].filename(), "frame_0000.png");
    EXPECT_EQ(frames[1].filename(), "frame_0001.raw");
    EXPECT_EQ(listSequence(d, "mask").size(), 4u);
    EXPECT_EQ(listSequence(d / "frame_0000.png", "frame").size(), 1u);
    EXPECT_THROW(listSequence(d / "absent", "frame"), MissingInputError);
}

TEST(Sequence, MatchByNumberThenPosition) {
    const auto m = matchSequence({"a/frame_0003.png", "a/frame_0009.png"}, {"g/gt_0009.png", "g/gt_0003.png"});
    EXPECT_EQ(m[0], fs::path("g/gt_0003.png"));
    EXPECT_EQ(m[1], fs::path("g/gt_0009.png"));
    EXPECT_EQ(matchSequence({"regions.png"}, {"truth.png"})[0], fs::path("truth.png"));
    EXPECT_TRUE(matchSequence({"frame_0001.png"}, {"gt_0002.png"})[0].empty());
}

TEST(Sequence, SamplingIsSeededSortedAndDistinct) {
    const auto a = sampleIndices(250, 25, 9);
    EXPECT_EQ(a, sampleIndices(250, 25, 9));
    ASSERT_EQ(a.size(), 25u);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
    EXPECT_NE(a, sampleIndices(250, 25, 10));
    EXPECT_EQ(sampleIndices(5, 0, 1).size(), 5u);
    EXPECT_EQ(sampleIndices(5, 9, 1).size(), 5u);
}

TEST(Features, CroppedDescriptorEqualsFullFrame) {
    FixtureParams fp;
    fp.width = 300;
    fp.height = 150;
    const auto f = makeFixture(fp).frames[0];
    const ChannelSet ch = makeChannelSet(f.rgb);
    LabelMap regions = f.gt;
    for (auto& l : regions.labels) ++l;  // every class becomes a nonzero region
    regions.clusterCount = 5;
    FeatureTable t;
    appendRegionFeatures(t, regions, ch, {}, 3);
    ASSERT_EQ(t.values.size(), 4u);
    EXPECT_EQ(t.keyColumns, (std::vector<std::string>{"frame", "region", "class"}));
    for (size_t r = 0; r < t.values.size(); ++r) {
        const int id = std::stoi(t.keys[r][1]);
        EXPECT_EQ(t.keys[r][0], "3");
        EXPECT_EQ(t.keys[r][2], "");
        const FeatureVector full = featureVector(maskOf(regions, id), ch);
        for (int k = 0; k < kFeatureCount; ++k) EXPECT_NEAR(t.values[r][k], full[k], 1e-12) << id << "/" << k;
    }
}

TEST(Features, CsvRoundTrip) {
    FixtureParams fp;
    fp.kind = FixtureKind::TwoTone;
    const auto f = makeFixture(fp).frames[0];
    LabelMap regions = f.gt;
    for (auto& l : regions.labels) ++l;
    regions.clusterCount = 4;  // the right half is class 2, region 3
    FeatureTable t;
    appendRegionFeatures(t, regions, makeChannelSet(f.rgb), {0, 0, 0, 1});
    const std::string csv = featureCsv(t);
    const FeatureTable back = parseFeatureCsv(csv);
    EXPECT_EQ(back.keyColumns, t.keyColumns);
    EXPECT_EQ(back.keys, t.keys);
    EXPECT_EQ(back.keys[0][1], "background");
    EXPECT_EQ(back.keys[1][1], "paw");
    EXPECT_EQ(featureCsv(back), csv);
    EXPECT_THROW(parseFeatureCsv("a,b\n1,2\n"), IngestError);
    EXPECT_THROW(parseFeatureCsv(csv + "1,,oops\n"), IngestError);
}

TEST(Artifacts, TrackLineIsValidJson) {
    TrackState s;
    s.frame = 4;
    s.x = 10.5;
    s.size = 300;
    const auto j = nlohmann::json::parse(trackJsonLine(s, 7, true));
    for (const char* k : {"frame", "x", "y", "region_size", "hue", "sat", "gray", "weight", "lost"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
    EXPECT_EQ(j["frame"], 4);
    EXPECT_EQ(j["weight"], 7);
    EXPECT_TRUE(j["lost"].is_boolean());
}

TEST(Config, ParsesEveryField) {
    const auto c = parseConfig(R"({
        "input": ["a", "b"], "gt": "g", "output": "o", "seed": 5,
        "channels": "hue", "merge_channel": "gray",
        "stages": ["segment", "merge", "features", "embed", "track", "eval"],
        "segmenter": {"method": "qs", "segments": 900, "compactness": 20, "iterations": 5,
                      "gb_scale": 100, "gb_sigma": 0.5, "gb_min_size": 20,
                      "qs_kernel": 2, "qs_max_distance": 6, "qs_ratio": 0.25},
        "merge": {"relative_threshold": 0.2, "absolute_fraction": 0.1},
        "embed": {"perplexity": 10, "iterations": 50},
        "track": {"seeds": [[1, 2], [3, 4]], "channels": "rgb", "segments": 700},
        "eval": {"classes": ["paw"], "sample": 25, "sweep": true, "sweep_channels": ["gray"], "sweep_segments": [50]}
    })");
    EXPECT_EQ(c.inputs.size(), 2u);
    EXPECT_EQ(*c.seed, 5u);
    EXPECT_EQ(c.channels, ChannelMode::Hue);
    EXPECT_EQ(c.effectiveMergeChannel(), ChannelMode::Gray);
    EXPECT_EQ(c.method, Method::Qs);
    EXPECT_EQ(c.slic.segmentCount, 900);
    EXPECT_EQ(c.gb.minSize, 20);
    EXPECT_EQ(c.qs.ratio, 0.25);
    EXPECT_EQ(c.merge.absoluteFraction, 0.1);
    EXPECT_EQ(c.tsne.iterations, 50);
    EXPECT_EQ(c.trackSeeds[1], std::make_pair(3, 4));
    EXPECT_EQ(c.trackSegments, 700);
    EXPECT_EQ(c.classes, std::vector<BodyClass>{BodyClass::Paw});
    EXPECT_EQ(c.evalSample, 25);
    EXPECT_TRUE(c.sweep);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsMalformedDocuments) {
    EXPECT_THROW(parseConfig("{"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"inputs": "a"})"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"segmenter": {"segs": 3}})"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"seed": -1})"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"seed": "x"})"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"stages": ["dance"]})"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"track": {"seeds": [[1]]}})"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"channels": "lab"})"), ParameterError);
}

TEST(Config, ValidationRules) {
    auto base = [] {
        PipelineConfig c;
        c.inputs = {"in"};
        c.output = "out";
        return c;
    };
    EXPECT_NO_THROW(base().validate());
    PipelineConfig c = base();
    c.inputs.clear();
    EXPECT_THROW(c.validate(), ConfigError);
    c = base();
    c.stages = {Stage::Segment, Stage::Merge, Stage::Features, Stage::Embed};
    EXPECT_THROW(c.validate(), ConfigError);  // embed without seed
    c.seed = 1;
    EXPECT_NO_THROW(c.validate());
    c.stages = {Stage::Segment, Stage::Overlay};
    EXPECT_THROW(c.validate(), ConfigError);
    c = base();
    c.stages = {Stage::Segment, Stage::Merge, Stage::Eval};
    EXPECT_THROW(c.validate(), ConfigError);  // eval without gt
    c.gt = "g";
    c.evalSample = 3;
    EXPECT_THROW(c.validate(), ConfigError);  // sampling without seed
    c = base();
    c.stages = {Stage::Track};
    EXPECT_THROW(c.validate(), ConfigError);
    c = base();
    c.slic.segmentCount = 0;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Pipeline, MissingInputWritesNothing) {
    const fs::path d = scratch("missing");
    PipelineConfig c;
    c.inputs = {d / "absent"};
    c.output = d / "out";
    EXPECT_THROW(runPipeline(c), MissingInputError);
    EXPECT_FALSE(fs::exists(c.output));
}

TEST(Pipeline, AllStagesAreReproducible) {
    const fs::path d = scratch("repro");
    FixtureParams fp;
    fp.frames = 2;
    fp.width = 320;
    fp.height = 160;
    writeFixture(makeFixture(fp), d / "fx");

    PipelineConfig c;
    c.inputs = {d / "fx"};
    c.gt = d / "fx";
    c.seed = 3;
    c.slic.segmentCount = 200;
    c.tsne.iterations = 200;
    c.trackSeeds = {{160, 80}};
    c.trackSegments = 200;
    c.stages = {Stage::Segment, Stage::Merge, Stage::Overlay, Stage::Features,
                Stage::Embed,   Stage::Track, Stage::Eval};
    c.output = d / "a";
    const auto a = runPipeline(c);
    c.output = d / "b";
    const auto b = runPipeline(c);
    ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
    for (size_t i = 0; i < a.artifacts.size(); ++i) {
        EXPECT_EQ(a.artifacts[i].filename(), b.artifacts[i].filename());
        EXPECT_EQ(slurp(a.artifacts[i]), slurp(b.artifacts[i])) << a.artifacts[i];
        EXPECT_EQ(a.artifacts[i].parent_path(), d / "a");
    }
    for (const char* n : {"labels_0001.png", "regions_0001.png", "overlay_0000.png", "features.csv",
                          "embedding.csv", "track.jsonl", "metrics.csv"}) {
        EXPECT_TRUE(fs::exists(d / "a" / n)) << n;
    }
}
