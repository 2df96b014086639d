#include "oracles.hpp"

#include "rodseg/fixture.hpp"
#include "rodseg/imgio.hpp"
#include "rodseg/superpixel.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace rodseg;

namespace {

RasterImage constantGray(int w, int h, uint8_t v) {
    return RasterImage(w, h, Layout::Gray8, std::vector<uint8_t>(static_cast<size_t>(w) * h, v));
}

RasterImage halves(int w, int h, uint8_t left, uint8_t right) {
    RasterImage img(w, h, Layout::Gray8);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) img.at(x, y) = x < w / 2 ? left : right;
    }
    return img;
}

void expectContiguous(const LabelMap& m) {
    ASSERT_GT(m.clusterCount, 0);
    const auto sizes = labelSizes(m);
    for (int64_t s : sizes) EXPECT_GT(s, 0);
    for (int32_t l : m.labels) {
        EXPECT_GE(l, 0);
        EXPECT_LT(l, m.clusterCount);
    }
}

// Column where the label changes on the given row, or -1 if it never does.
int boundaryColumn(const LabelMap& m, int y) {
    for (int x = 1; x < m.width; ++x) {
        if (m.at(x, y) != m.at(x - 1, y)) return x;
    }
    return -1;
}

} // namespace

TEST(Slic, ConstantImageFourQuadrants) {
    SlicParams p;
    p.segmentCount = 4;
    const LabelMap m = slicSegment(constantGray(64, 64, 90), p);
    ASSERT_EQ(m.clusterCount, 4);
    for (int64_t s : labelSizes(m)) {
        EXPECT_GE(s, 1024 * 0.9);
        EXPECT_LE(s, 1024 * 1.1);
    }
    EXPECT_NE(m.at(10, 10), m.at(50, 10));
    EXPECT_NE(m.at(10, 10), m.at(10, 50));
    EXPECT_NE(m.at(50, 50), m.at(50, 10));
}

TEST(Slic, TwoToneBoundaryAtMiddleColumn) {
    SlicParams p;
    p.segmentCount = 2;
    p.compactness = 1.0;
    const RasterImage img = halves(64, 64, 0, 255);
    const LabelMap m = slicSegment(img, p);
    ASSERT_EQ(m.clusterCount, 2);
    for (int y = 0; y < 64; ++y) EXPECT_NEAR(boundaryColumn(m, y), 32, 1);

    const SlicClustering c = slicCluster(img, p);
    const double s = c.grid.step;
    const auto ref = oracle::kmeans(img, c.grid.centers, p.compactness * p.compactness / (s * s), s, 100);
    ASSERT_TRUE(ref.converged);
    EXPECT_EQ(c.assignment.labels, ref.assignment);
}

TEST(Slic, MatchesConstrainedKmeansOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_int_distribution<int> blocks(2, 6);
    std::uniform_real_distribution<double> compact(1.0, 40.0);
    for (int trial = 0; trial < 25; ++trial) {
        const Layout layout = trial % 2 == 0 ? Layout::RGB8 : Layout::Gray8;
        const RasterImage img = oracle::randomBlocks(rng, 32, 32, blocks(rng), 10, layout);
        SlicParams p;
        p.segmentCount = count(rng);
        p.compactness = compact(rng);
        p.iterations = 200;
        const SlicClustering c = slicCluster(img, p);
        ASSERT_TRUE(c.converged) << "trial " << trial;
        const double s = c.grid.step;
        const auto ref = oracle::kmeans(img, c.grid.centers, p.compactness * p.compactness / (s * s), s, 200);
        ASSERT_TRUE(ref.converged);
        EXPECT_EQ(c.assignment.labels, ref.assignment) << "trial " << trial;
    }
}

TEST(Slic, SegmentCountAbovePixelsIsError) {
    SlicParams p;
    p.segmentCount = 17;
    EXPECT_THROW(slicSegment(constantGray(4, 4, 0), p), ParameterError);
    p.segmentCount = 0;
    EXPECT_THROW(slicSegment(constantGray(4, 4, 0), p), ParameterError);
}

TEST(Slic, GridHoldsAtLeastRequestedCells) {
    for (int n : {1, 3, 7, 50, 500}) {
        const SlicGrid g = slicGrid(constantGray(97, 41, 1), n);
        EXPECT_GE(g.columns * g.rows, n);
        EXPECT_EQ(static_cast<int>(g.centers.size()), g.columns * g.rows);
    }
}

TEST(Slic, EnergyNonIncreasing) {
    FixtureParams fp;
    fp.kind = FixtureKind::RodentSilhouette;
    fp.width = 320;
    fp.height = 200;
    fp.seed = 4;
    const RasterImage rgb = makeFixture(fp).frames[0].rgb;
    for (ChannelMode mode : {ChannelMode::Rgb, ChannelMode::Hue, ChannelMode::Gray}) {
        for (int n : {50, 300}) {
            SlicParams p;
            p.segmentCount = n;
            p.iterations = 20;
            const SlicClustering c = slicCluster(channelImage(rgb, mode), p);
            for (size_t i = 1; i < c.energy.size(); ++i) {
                EXPECT_LE(c.energy[i], c.energy[i - 1] * (1 + 1e-12)) << "pass " << i;
            }
        }
    }
}

TEST(Slic, SizeBoundAndTotality) {
    FixtureParams fp;
    fp.kind = FixtureKind::RodentSilhouette;
    fp.width = 400;
    fp.height = 240;
    const RasterImage rgb = makeFixture(fp).frames[0].rgb;
    for (int n : {100, 500, 1500}) {
        SlicParams p;
        p.segmentCount = n;
        const LabelMap m = slicSegment(rgb, p);
        expectContiguous(m);
        const SlicGrid g = slicGrid(rgb, n);
        for (int64_t s : labelSizes(m)) EXPECT_LE(s, 2.0 * g.cellArea);
    }
}

TEST(Slic, Deterministic) {
    std::mt19937_64 rng(8);
    const RasterImage img = oracle::randomBlocks(rng, 60, 45, 8, 12, Layout::RGB8);
    SlicParams p;
    p.segmentCount = 30;
    EXPECT_EQ(slicSegment(img, p), slicSegment(img, p));
}

TEST(Slic, ConnectivityLeavesConnectedLabels) {
    std::mt19937_64 rng(13);
    const RasterImage img = oracle::randomBlocks(rng, 80, 60, 20, 25, Layout::RGB8);
    SlicParams p;
    p.segmentCount = 40;
    const LabelMap m = slicSegment(img, p);
    const auto comps = componentsPerLabel(m);
    for (size_t l = 0; l < comps.size(); ++l) EXPECT_EQ(comps[l], 1) << "label " << l;
}

TEST(Gb, ConstantImageOneLabel) {
    const LabelMap m = gbSegment(constantGray(30, 20, 40), GbParams{});
    EXPECT_EQ(m.clusterCount, 1);
}

TEST(Gb, TwoToneSplitsAtEdge) {
    GbParams p;
    p.scale = 10;
    p.sigma = 0.01;
    p.minSize = 5;
    const LabelMap m = gbSegment(halves(64, 32, 20, 220), p);
    ASSERT_EQ(m.clusterCount, 2);
    for (int y = 0; y < 32; ++y) EXPECT_EQ(boundaryColumn(m, y), 32);
}

TEST(Gb, ComponentsRespectMinSize) {
    std::mt19937_64 rng(31);
    const RasterImage img = oracle::randomBlocks(rng, 70, 50, 25, 30, Layout::RGB8);
    GbParams p;
    p.minSize = 40;
    const LabelMap m = gbSegment(img, p);
    expectContiguous(m);
    for (int64_t s : labelSizes(m)) EXPECT_GE(s, 40);
}

TEST(Gb, InvalidParameters) {
    GbParams p;
    p.scale = 0;
    EXPECT_THROW(gbSegment(constantGray(4, 4, 0), p), ParameterError);
}

TEST(Qs, ConstantImageOneLabel) {
    QsParams p;
    p.maxDistance = 40;
    const LabelMap m = qsSegment(constantGray(24, 24, 100), p);
    EXPECT_EQ(m.clusterCount, 1);
}

TEST(Qs, MatchesNaiveOracle) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 4; ++trial) {
        const RasterImage img = oracle::randomBlocks(rng, 20, 16, 4, 8, trial % 2 ? Layout::Gray8 : Layout::RGB8);
        QsParams p;
        p.kernelSize = 2;
        p.maxDistance = 6;
        const QuickShiftForest forest = quickShiftForest(img, p);
        EXPECT_EQ(forest.parent, oracle::quickShiftParents(img, p));
    }
}

TEST(Qs, SeparatesTwoBlobs) {
    RasterImage img(40, 24, Layout::RGB8);
    for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < 40; ++x) {
            const bool a = (x - 10) * (x - 10) + (y - 12) * (y - 12) <= 25;
            const bool b = (x - 30) * (x - 30) + (y - 12) * (y - 12) <= 25;
            img.at(x, y, 0) = a ? 220 : b ? 20 : 120;
            img.at(x, y, 1) = a ? 40 : b ? 30 : 120;
            img.at(x, y, 2) = a ? 40 : b ? 210 : 120;
        }
    }
    const LabelMap m = qsSegment(img, QsParams{});
    EXPECT_GE(m.clusterCount, 2);
    EXPECT_NE(m.at(10, 12), m.at(30, 12));
    EXPECT_EQ(m, labelsFromForest(40, 24, oracle::quickShiftParents(img, QsParams{})));
}

TEST(Qs, ZeroKernelIsError) {
    QsParams p;
    p.kernelSize = 0;
    EXPECT_THROW(qsSegment(constantGray(8, 8, 0), p), ParameterError);
}

TEST(Segmenters, RejectBayerInput) {
    const RasterImage raw(8, 8, Layout::BayerRGGB8);
    EXPECT_THROW(slicSegment(raw, SlicParams{}), LayoutError);
    EXPECT_THROW(gbSegment(raw, GbParams{}), LayoutError);
    EXPECT_THROW(qsSegment(raw, QsParams{}), LayoutError);
}
