#include "rodseg/fixture.hpp"

#include "rodseg/imgio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace rodseg {

std::string_view fixtureKindName(FixtureKind kind) {
    switch (kind) {
    case FixtureKind::TwoTone: return "two-tone";
    case FixtureKind::BlobSequence: return "blob-sequence";
    case FixtureKind::RodentSilhouette: return "textured-rodent-silhouette";
    }
    return "?";
}

FixtureKind parseFixtureKind(std::string_view name) {
    if (name == "two-tone") return FixtureKind::TwoTone;
    if (name == "blob-sequence") return FixtureKind::BlobSequence;
    if (name == "textured-rodent-silhouette") return FixtureKind::RodentSilhouette;
    throw ParameterError("unknown fixture kind '" + std::string(name) + "'");
}

void FixtureParams::validate() const {
    if (width < 0 || height < 0) throw ParameterError("fixture: negative dimensions");
    if (frames < 1) throw ParameterError("fixture: frames must be >= 1");
    if (noise < 0 || noise > 64) throw ParameterError("fixture: noise must be in [0, 64]");
    if (kind == FixtureKind::BlobSequence) {
        if (blobRadius < 1) throw ParameterError("fixture: blob radius must be >= 1");
        if (maxStep < 0) throw ParameterError("fixture: max step must be >= 0");
        if (jumpSize < 0) throw ParameterError("fixture: jump size must be >= 0");
    }
}

std::string numberedName(std::string_view prefix, int index, std::string_view ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d", index);
    return std::string(prefix) + "_" + buf + std::string(ext);
}

namespace {

using Rgb = std::array<int, 3>;

constexpr Rgb kTwoToneLeft{40, 90, 160};
constexpr Rgb kTwoToneRight{200, 120, 50};
constexpr Rgb kFloor{200, 190, 160};
constexpr Rgb kBlob{30, 40, 120};
constexpr Rgb kBackground{70, 110, 80};
constexpr Rgb kBody{180, 160, 130};
constexpr Rgb kPaw{245, 175, 205};
constexpr Rgb kTail{60, 50, 110};

struct Canvas {
    int w;
    int h;
    std::vector<Rgb> color;
    LabelMap gt;

    Canvas(int width, int height, Rgb fill) : w(width), h(height), color(size_t(width) * height, fill), gt(width, height, 0) {
        gt.clusterCount = 4;
    }

    void paint(int x, int y, Rgb c, int cls) {
        color[size_t(y) * w + x] = c;
        gt.labels[size_t(y) * w + x] = cls;
    }

    // Pixel centers inside the rotated ellipse.
    void ellipse(double cx, double cy, double a, double b, double angle, Rgb c, int cls) {
        const double r = std::max(a, b);
        const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + r)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + r)));
        const double ca = std::cos(angle);
        const double sa = std::sin(angle);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x - cx;
                const double dy = y - cy;
                const double u = (dx * ca + dy * sa) / a;
                const double v = (-dx * sa + dy * ca) / b;
                if (u * u + v * v <= 1.0) paint(x, y, c, cls);
            }
        }
    }

    RasterImage render(std::mt19937_64& rng, int noise) const {
        std::vector<uint8_t> data(size_t(w) * h * 3);
        std::uniform_int_distribution<int> jitter(-noise, noise);
        for (size_t p = 0; p < color.size(); ++p) {
            for (int c = 0; c < 3; ++c) {
                const int v = color[p][c] + (noise > 0 ? jitter(rng) : 0);
                data[p * 3 + c] = static_cast<uint8_t>(std::clamp(v, 0, 255));
            }
        }
        return RasterImage(w, h, Layout::RGB8, std::move(data));
    }
};

// Low-frequency texture so the background is not flat.
Rgb textured(Rgb base, int x, int y) {
    const double t = 8.0 * std::sin(x / 17.0) * std::cos(y / 23.0);
    const int d = static_cast<int>(std::lround(t));
    return {base[0] + d, base[1] + d, base[2] + d};
}

Fixture twoTone(const FixtureParams& p, std::mt19937_64& rng) {
    const int w = p.width > 0 ? p.width : 64;
    const int h = p.height > 0 ? p.height : 64;
    Fixture f;
    f.kind = FixtureKind::TwoTone;
    for (int i = 0; i < p.frames; ++i) {
        Canvas canvas(w, h, kTwoToneLeft);
        for (int y = 0; y < h; ++y) {
            for (int x = w / 2; x < w; ++x) canvas.paint(x, y, kTwoToneRight, 2);
        }
        f.frames.push_back({canvas.render(rng, p.noise), canvas.gt, 0, 0});
    }
    return f;
}

Fixture blobSequence(const FixtureParams& p, std::mt19937_64& rng) {
    const int w = p.width > 0 ? p.width : 320;
    const int h = p.height > 0 ? p.height : 240;
    const int r = p.blobRadius;
    const int margin = r + 2;
    if (w <= 2 * margin || h <= 2 * margin) throw ParameterError("fixture: frame too small for the blob");

    Fixture f;
    f.kind = FixtureKind::BlobSequence;
    int cx = w / 2;
    int cy = h / 2;
    double heading = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    std::normal_distribution<double> turn(0.0, 0.35);
    std::uniform_real_distribution<double> speedDist(p.maxStep / 3.0, static_cast<double>(p.maxStep));

    // Reflects a coordinate back into [lo, hi]; returns true if it bounced.
    auto reflect = [](int& v, int lo, int hi) {
        if (v < lo) {
            v = std::min(2 * lo - v, hi);
            return true;
        }
        if (v > hi) {
            v = std::max(2 * hi - v, lo);
            return true;
        }
        return false;
    };

    int vx = p.stepX;
    int vy = p.stepY;
    for (int i = 0; i < p.frames; ++i) {
        if (i > 0) {
            int dx = vx;
            int dy = vy;
            if (p.maxStep > 0) {
                heading += turn(rng);
                double s = speedDist(rng);
                do {
                    dx = static_cast<int>(std::lround(s * std::cos(heading)));
                    dy = static_cast<int>(std::lround(s * std::sin(heading)));
                    s -= 0.5;
                } while (dx * dx + dy * dy > p.maxStep * p.maxStep);
            }
            cx += dx;
            cy += dy;
            if (reflect(cx, margin, w - 1 - margin)) {
                heading = std::numbers::pi - heading;
                vx = -vx;
            }
            if (reflect(cy, margin, h - 1 - margin)) {
                heading = -heading;
                vy = -vy;
            }
        }
        if (i == p.jumpFrame) {
            cx += cx + p.jumpSize <= w - 1 - margin ? p.jumpSize : -p.jumpSize;
            cx = std::clamp(cx, margin, w - 1 - margin);
        }

        Canvas canvas(w, h, kFloor);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) canvas.color[size_t(y) * w + x] = textured(kFloor, x, y);
        }
        for (int y = cy - r; y <= cy + r; ++y) {
            for (int x = cx - r; x <= cx + r; ++x) {
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) canvas.paint(x, y, kBlob, 1);
            }
        }
        // The disk is symmetric about an integer center, so its pixel centroid is exact.
        f.frames.push_back({canvas.render(rng, p.noise), canvas.gt, double(cx), double(cy)});
    }
    return f;
}

Fixture rodentSilhouette(const FixtureParams& p, std::mt19937_64& rng) {
    const int w = p.width > 0 ? p.width : 2048;
    const int h = p.height > 0 ? p.height : 700;
    Fixture f;
    f.kind = FixtureKind::RodentSilhouette;

    struct Paw {
        double fx, fy;  // position relative to the body center, in body semi-axes
        double a, b, angle;
    };
    std::uniform_int_distribution<int> areaDist(kPawAreaMin, kPawAreaMax);
    std::uniform_real_distribution<double> ratioDist(0.6, 1.0);
    std::uniform_real_distribution<double> angleDist(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> jitterDist(-0.08, 0.08);
    const std::array<std::pair<double, double>, 4> anchors = {{{0.55, 0.85}, {0.55, -0.85}, {-0.55, 0.85}, {-0.55, -0.85}}};
    std::vector<Paw> paws;
    for (const auto& [ax, ay] : anchors) {
        const int area = areaDist(rng);
        const double ratio = ratioDist(rng);
        const double a = std::sqrt(area / (std::numbers::pi * ratio));
        paws.push_back({ax + jitterDist(rng), ay + jitterDist(rng), a, a * ratio, angleDist(rng)});
        f.pawAreas.push_back(area);
    }

    const double bodyA = 0.22 * w;
    const double bodyB = 0.25 * h;
    for (int i = 0; i < p.frames; ++i) {
        const double bx = 0.5 * w + 4.0 * i;
        const double by = 0.5 * h;
        Canvas canvas(w, h, kBackground);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) canvas.color[size_t(y) * w + x] = textured(kBackground, x, y);
        }
        canvas.ellipse(bx - bodyA - 0.12 * w, by + 0.05 * h, 0.14 * w, std::max(4.0, 0.02 * h), 0.08, kTail, 3);
        canvas.ellipse(bx, by, bodyA, bodyB, 0.0, kBody, 2);
        canvas.ellipse(bx + bodyA + 0.01 * w, by, 0.02 * w, std::max(3.0, 0.03 * h), 0.0, kTail, 3);
        for (const Paw& paw : paws) {
            canvas.ellipse(bx + paw.fx * bodyA, by + paw.fy * bodyB, paw.a, paw.b, paw.angle, kPaw, 1);
        }
        f.frames.push_back({canvas.render(rng, p.noise), canvas.gt, 0, 0});
    }
    return f;
}

} // namespace

Fixture makeFixture(const FixtureParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    switch (params.kind) {
    case FixtureKind::TwoTone: return twoTone(params, rng);
    case FixtureKind::BlobSequence: return blobSequence(params, rng);
    case FixtureKind::RodentSilhouette: return rodentSilhouette(params, rng);
    }
    throw ParameterError("unknown fixture kind");
}

void writeFixture(const Fixture& fixture, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (size_t i = 0; i < fixture.frames.size(); ++i) {
        writePng(dir / numberedName("frame", static_cast<int>(i)), fixture.frames[i].rgb);
        saveLabelMap(dir / numberedName("gt", static_cast<int>(i)), fixture.frames[i].gt);
    }
    if (fixture.kind == FixtureKind::BlobSequence) {
        std::ofstream out(dir / "truth.csv", std::ios::binary);
        out << "frame,cx,cy\n";
        char line[96];
        for (size_t i = 0; i < fixture.frames.size(); ++i) {
            std::snprintf(line, sizeof line, "%zu,%.3f,%.3f\n", i, fixture.frames[i].cx, fixture.frames[i].cy);
            out << line;
        }
        if (!out) throw Error("cannot write " + (dir / "truth.csv").string());
    }
}

} // namespace rodseg
