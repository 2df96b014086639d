// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "oracles.hpp"

#include "rodseg/eval.hpp"
#include "rodseg/features.hpp"
#include "rodseg/fixture.hpp"
#include "rodseg/imgio.hpp"
#include "rodseg/merge.hpp"
#include "rodseg/pipeline.hpp"
#include "rodseg/superpixel.hpp"
#include "rodseg/tracker.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace rodseg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Superpixel sizes at N=4500 on a 2048x700 frame.
Outcome slicSizes() {
    const RasterImage rgb = makeFixture(FixtureParams{}).frames[0].rgb;
    SlicParams p;
    p.segmentCount = 4500;
    const auto t0 = std::chrono::steady_clock::now();
    const LabelMap labels = slicSegment(rgb, p);
    const double t = seconds(t0);
    const auto sizes = labelSizes(labels);
    int inRange = 0;
    for (int64_t s : sizes) inRange += s >= 150 && s <= 600 ? 1 : 0;
    const double frac = static_cast<double>(inRange) / static_cast<double>(sizes.size());
    return {frac >= 0.90 && t < 30.0,
            fmt("%.0f superpixels, %.4f in [150, 600], %.2f s", static_cast<double>(sizes.size()), frac, t)};
}

// 2. Converged SLIC assignment equals the brute-force windowed k-means.
Outcome slicOracle() {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_int_distribution<int> blocks(2, 6);
    std::uniform_real_distribution<double> compact(1.0, 40.0);
    const int trials = 25;
    int matched = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const Layout layout = trial % 2 == 0 ? Layout::RGB8 : Layout::Gray8;
        const RasterImage img = oracle::randomBlocks(rng, 32, 32, blocks(rng), 10, layout);
        SlicParams p;
        p.segmentCount = count(rng);
        p.compactness = compact(rng);
        p.iterations = 500;
        const SlicClustering c = slicCluster(img, p);
        const double s = c.grid.step;
        const auto ref = oracle::kmeans(img, c.grid.centers, p.compactness * p.compactness / (s * s), s, 500);
        if (c.converged && ref.converged && c.assignment.labels == ref.assignment) ++matched;
    }
    return {matched == trials, fmt("%.0f/%.0f instances identical", matched, trials)};
}

// 3. Merging its own output changes nothing and no adjacent groups still link.
Outcome mergeFixpoint() {
    int cases = 0;
    int good = 0;
    for (FixtureKind kind : {FixtureKind::TwoTone, FixtureKind::BlobSequence, FixtureKind::RodentSilhouette}) {
        FixtureParams fp;
        fp.kind = kind;
        const RasterImage rgb = makeFixture(fp).frames[0].rgb;
        for (ChannelMode mode : {ChannelMode::Rgb, ChannelMode::Hue, ChannelMode::Gray}) {
            const RasterImage plane = channelImage(rgb, mode);
            SlicParams p;
            p.segmentCount = kind == FixtureKind::TwoTone ? 64 : 1500;
            const LabelMap labels = slicSegment(plane, p);
            const auto stats = computeStats(labels, plane);
            const auto graph = buildAdjacency(labels);
            const MergeParams mp;
            const auto r = mergeRegions(stats, graph, intensityMax(mode), mp);
            const auto gs = groupStats(r, stats);
            const auto gg = groupAdjacency(r, graph);
            bool ok = true;
            const double m = mp.absoluteFraction * intensityMax(mode);
            for (size_t a = 0; a < gg.size() && ok; ++a) {
                for (int b : gg.neighbors[a]) {
                    ok = ok && !linkCondition(gs.items[a].intensity, gs.items[b].intensity, mp.relativeThreshold, m);
                }
            }
            const auto again = mergeRegions(gs, gg, intensityMax(mode), mp);
            ok = ok && again.groups.size() == r.groups.size();
            for (size_t i = 0; i < again.groupOf.size() && ok; ++i) ok = again.groupOf[i] == static_cast<int>(i);
            ++cases;
            good += ok ? 1 : 0;
        }
    }
    return {good == cases, fmt("%.0f/%.0f fixture x channel cases at a fixpoint", good, cases)};
}

// 4. Confusion counts and ratios against a per-pixel loop, plus the worked example.
Outcome metricExactness() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> density(0.1, 0.9);
    int exact = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const BinaryMask pred = oracle::randomMask(rng, 8, 8, density(rng));
        const BinaryMask gt = oracle::randomMask(rng, 8, 8, density(rng));
        const ConfusionCounts c = confusion(pred, gt);
        const ConfusionCounts o = oracle::confusion(pred, gt);
        const Metrics m = metrics(c);
        auto ratio = [](int64_t a, int64_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
        const bool same = c == o && m.sensitivity == ratio(o.tp, o.tp + o.fn) &&
                          m.specificity == ratio(o.tn, o.tn + o.fp) && m.precision == ratio(o.tp, o.tp + o.fp) &&
                          m.accuracy == ratio(o.tp + o.tn, 64);
        exact += same ? 1 : 0;
    }
    const Metrics w = metrics(ConfusionCounts{50, 10, 40, 0});
    const bool worked = w.sensitivity == 1.0 && w.specificity == 0.8 && w.precision == 50.0 / 60.0 && w.accuracy == 0.9;
    return {exact == 100 && worked, fmt("%.0f/100 random pairs exact; worked example (%.4f, %.4f, %.4f, ...)", exact,
                                        w.sensitivity, w.specificity, w.precision) +
                                        (worked ? " ok" : " WRONG")};
}

// 5. Paw sensitivity does not drop when going from 500 to 4500 superpixels.
Outcome sensitivityTrend() {
    FixtureParams fp;
    fp.frames = 3;
    const Fixture f = makeFixture(fp);
    std::vector<EvalFrame> frames;
    for (size_t i = 0; i < f.frames.size(); ++i) frames.push_back({f.frames[i].rgb, f.frames[i].gt, std::to_string(i)});
    SweepConfig cfg;
    cfg.classes = {BodyClass::Paw};
    cfg.segmentCounts = {500, 4500};
    const auto records = rocSweep(frames, cfg);
    bool ok = records.size() == 6;
    std::string detail;
    for (size_t c = 0; c + 1 < records.size(); c += 2) {
        const double lo = records[c].metrics.sensitivity;
        const double hi = records[c + 1].metrics.sensitivity;
        ok = ok && hi >= lo;
        detail += records[c].channels + fmt(" %.4f->%.4f ", lo, hi);
    }
    return {ok, detail + "(N=500 -> N=4500, 3 frames)"};
}

// 6. SLIC is the fastest of the three segmenters on the full-size frame.
Outcome timingOrder() {
    BenchConfig cfg;
    cfg.repetitions = 3;
    const auto rows = bench({Method::Slic, Method::Gb, Method::Qs}, {makeFixture(FixtureParams{}).frames[0].rgb}, cfg);
    const double slic = rows[0].meanSeconds;
    const double gb = rows[1].meanSeconds;
    const double qs = rows[2].meanSeconds;
    bool reps = true;
    for (const auto& r : rows) reps = reps && r.runs >= 3;
    return {reps && slic < gb && slic < qs,
            fmt("slic %.3f s, gb %.3f s, qs %.3f s, runs %.0f", slic, gb, qs, rows[0].runs)};
}

// 7. GLCM statistics against direct pair enumeration.
Outcome glcmExactness() {
    std::mt19937_64 rng(707);
    std::uniform_int_distribution<int> value(0, 255);
    int exact = 0;
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        RasterImage gray(6, 6, Layout::Gray8);
        for (auto& v : gray.data()) v = static_cast<uint8_t>(value(rng));
        BinaryMask mask(6, 6);
        for (auto& b : mask.bits) b = 1;
        bool ok = true;
        for (GlcmAngle a : kGlcmAngles) {
            const auto [dx, dy] = glcmOffset(a);
            bool degenerate = false;
            const auto ref = oracle::haralickFromPairs(gray, mask, dx, dy, kDefaultGlcmLevels, degenerate);
            const auto got = haralick(glcm(gray, mask, a)).values();
            for (size_t k = 0; k < got.size(); ++k) {
                const double e = std::abs(got[k] - ref[k]);
                worst = std::max(worst, e);
                ok = ok && e <= 1e-12;
            }
        }
        exact += ok ? 1 : 0;
    }
    RasterImage flat(6, 6, Layout::Gray8);
    for (auto& v : flat.data()) v = 123;
    BinaryMask all(6, 6);
    for (auto& b : all.bits) b = 1;
    bool constant = true;
    const std::array<double, 6> expect = {0, 0, 1, 1, 1, 0};
    for (GlcmAngle a : kGlcmAngles) constant = constant && haralick(glcm(flat, all, a)).values() == expect;
    return {exact == 50 && constant,
            fmt("%.0f/50 crops within 1e-12 (max error %.2e); constant crop ", exact, worst) +
                (constant ? "(0,0,1,1,1,0)" : "WRONG")};
}

// 8. Tracking a randomly walking blob, and losing it on a jump.
Outcome trackerRobustness() {
    FixtureParams fp;
    fp.kind = FixtureKind::BlobSequence;
    fp.frames = 500;
    fp.width = 640;
    fp.height = 480;
    fp.maxStep = 30;
    fp.seed = 8;
    const Fixture walk = makeFixture(fp);
    double maxStep = 0;
    for (size_t i = 1; i < walk.frames.size(); ++i) {
        maxStep = std::max(maxStep, std::hypot(walk.frames[i].cx - walk.frames[i - 1].cx,
                                               walk.frames[i].cy - walk.frames[i - 1].cy));
    }
    TrackerParams tp;
    tp.slic.segmentCount = 1500;
    auto run = [&](const Fixture& f, int& firstLost, double& maxError) {
        Tracker t = Tracker::seeded(f.frames[0].rgb, static_cast<int>(f.frames[0].cx),
                                    static_cast<int>(f.frames[0].cy), tp);
        int lost = 0;
        for (size_t i = 1; i < f.frames.size(); ++i) {
            const StepResult r = t.step(f.frames[i].rgb);
            if (r.lost) {
                if (lost++ == 0) firstLost = static_cast<int>(i);
                continue;
            }
            maxError = std::max(maxError, std::hypot(r.state.x - f.frames[i].cx, r.state.y - f.frames[i].cy));
        }
        return lost;
    };
    int firstLost = -1;
    double maxError = 0;
    const int lost = run(walk, firstLost, maxError);

    fp.frames = 40;
    fp.maxStep = 0;
    fp.stepX = 3;
    fp.jumpFrame = 20;
    fp.jumpSize = 60;
    int jumpLost = -1;
    double unused = 0;
    run(makeFixture(fp), jumpLost, unused);
    return {lost == 0 && maxError <= 3.0 && maxStep <= 30.0 && jumpLost == 20,
            fmt("500 frames (max step %.1f px): %.0f lost, max error %.3f px; 60 px jump lost at frame %.0f", maxStep,
                lost, maxError, jumpLost)};
}

// 9. t-SNE gradient, objective decrease and cluster separation.
Outcome tsneChecks() {
    std::mt19937_64 rng(909);
    const auto small = oracle::twoClusters(rng, 8, 5, 4.0);
    const auto p = tsneAffinities(standardize(small), 4.0);
    std::normal_distribution<double> pos(0.0, 1.0);
    std::vector<std::array<double, 2>> y(small.size());
    for (auto& v : y) v = {pos(rng), pos(rng)};
    const auto g = tsneGradient(p, y);
    const auto num = oracle::numericGradient(p, y, 1e-5);
    double diff = 0, norm = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        for (int d = 0; d < 2; ++d) {
            diff += (g[i][d] - num[i][d]) * (g[i][d] - num[i][d]);
            norm += num[i][d] * num[i][d];
        }
    }
    const double rel = std::sqrt(diff / norm);

    const int per = 15;
    const auto rows = oracle::twoClusters(rng, per, kFeatureCount, 12.0);
    TsneParams tp;
    tp.seed = 9;
    const TsneResult r = tsne(rows, tp);
    double intra = 0, inter = 1e300;
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = i + 1; j < rows.size(); ++j) {
            const double d = std::hypot(r.embedding[i][0] - r.embedding[j][0], r.embedding[i][1] - r.embedding[j][1]);
            if ((i < static_cast<size_t>(per)) == (j < static_cast<size_t>(per))) {
                intra = std::max(intra, d);
            } else {
                inter = std::min(inter, d);
            }
        }
    }
    return {rel <= 1e-4 && r.finalKl < r.initialKl && intra < inter,
            fmt("gradient rel. error %.2e; KL %.4f -> %.4f; ", rel, r.initialKl, r.finalKl) +
                fmt("max intra-cluster distance %.2f, min inter-cluster %.2f", intra, inter)};
}

// 10. Two pipeline runs with the same seed give byte-identical tables.
Outcome pipelineDeterminism() {
    const fs::path root = fs::temp_directory_path() / "rodseg_acceptance_pipeline";
    fs::remove_all(root);
    FixtureParams fp;
    fp.frames = 3;
    fp.width = 512;
    fp.height = 256;
    fp.seed = 10;
    writeFixture(makeFixture(fp), root / "fixture");

    PipelineConfig c;
    c.inputs = {root / "fixture"};
    c.gt = root / "fixture";
    c.seed = 10;
    c.slic.segmentCount = 600;
    c.stages = {Stage::Segment, Stage::Merge, Stage::Overlay, Stage::Features, Stage::Embed, Stage::Track, Stage::Eval};
    c.tsne.iterations = 500;
    c.trackSeeds = {{256, 128}};
    c.trackSegments = 600;
    c.evalSample = 2;
    c.sweep = true;
    c.sweepSegments = {200, 600};

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    c.output = root / "run_a";
    const auto a = runPipeline(c);
    c.output = root / "run_b";
    const auto b = runPipeline(c);
    int tables = 0;
    int identical = 0;
    for (size_t i = 0; i < a.artifacts.size() && i < b.artifacts.size(); ++i) {
        const auto ext = a.artifacts[i].extension();
        if (ext != ".csv" && ext != ".jsonl") continue;
        ++tables;
        identical += slurp(a.artifacts[i]) == slurp(b.artifacts[i]) ? 1 : 0;
    }
    return {a.artifacts.size() == b.artifacts.size() && tables > 0 && identical == tables,
            fmt("%.0f/%.0f CSV/JSONL outputs byte-identical", identical, tables)};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"superpixel sizes at N=4500 on 2048x700", slicSizes},
        {"SLIC equals brute-force k-means on 32x32, N<=4", slicOracle},
        {"merge fixpoint on every fixture", mergeFixpoint},
        {"confusion and metrics exactness", metricExactness},
        {"paw sensitivity non-decreasing with N", sensitivityTrend},
        {"SLIC faster than Gb and QS", timingOrder},
        {"GLCM/Haralick exactness", glcmExactness},
        {"tracker robustness", trackerRobustness},
        {"t-SNE checks", tsneChecks},
        {"pipeline determinism", pipelineDeterminism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d: %s  %s | %s [%.1f s]\n", index, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                    seconds(t0));
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d/%d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
