#include "rodseg/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rodseg {

namespace {

void requireSameSize(const BinaryMask& region, const RasterImage& img, const char* op) {
    if (region.width != img.width() || region.height != img.height()) {
        throw DimensionError(std::string(op) + ": mask and image differ in size");
    }
}

struct Box {
    int x0, y0, x1, y1;  // inclusive
};

Box boundingBox(const BinaryMask& region) {
    Box b{region.width, region.height, -1, -1};
    for (int y = 0; y < region.height; ++y) {
        for (int x = 0; x < region.width; ++x) {
            if (!region.at(x, y)) continue;
            b.x0 = std::min(b.x0, x);
            b.y0 = std::min(b.y0, y);
            b.x1 = std::max(b.x1, x);
            b.y1 = std::max(b.y1, y);
        }
    }
    return b;
}

} // namespace

std::array<double, 4> colorMeans(const BinaryMask& region, const RasterImage& gray, const RasterImage& green,
                                 const RasterImage& sat, const RasterImage& hue) {
    const RasterImage* planes[4] = {&gray, &green, &sat, &hue};
    for (const auto* plane : planes) {
        requireSameSize(region, *plane, "colorMeans");
        if (plane->channels() != 1) throw LayoutError("colorMeans: expected single-channel planes");
    }
    std::array<int64_t, 4> sums{};
    int64_t count = 0;
    for (size_t i = 0; i < region.bits.size(); ++i) {
        if (!region.bits[i]) continue;
        ++count;
        for (int c = 0; c < 4; ++c) sums[c] += planes[c]->data()[i];
    }
    if (count == 0) throw Error("colorMeans: empty region");
    std::array<double, 4> means{};
    for (int c = 0; c < 4; ++c) means[c] = static_cast<double>(sums[c]) / static_cast<double>(count);
    return means;
}

std::pair<int, int> glcmOffset(GlcmAngle angle) {
    switch (angle) {
    case GlcmAngle::Deg0: return {1, 0};
    case GlcmAngle::Deg45: return {1, -1};
    case GlcmAngle::Deg90: return {0, -1};
    case GlcmAngle::Deg135: return {-1, -1};
    }
    return {1, 0};
}

int quantize(uint8_t value, int levels) {
    return value * levels / 256;
}

GlcmMatrix glcm(const RasterImage& gray, const BinaryMask& region, GlcmAngle angle, int levels) {
    requireLayout(gray, {Layout::Gray8}, "glcm");
    requireSameSize(region, gray, "glcm");
    if (levels < 2 || levels > 256) throw ParameterError("glcm: levels must be in [2, 256]");

    GlcmMatrix m;
    m.levels = levels;
    m.p.assign(static_cast<size_t>(levels) * levels, 0.0);
    const auto [dx, dy] = glcmOffset(angle);
    const Box box = boundingBox(region);

    int64_t pairs = 0;
    for (int y = box.y0; y <= box.y1; ++y) {
        for (int x = box.x0; x <= box.x1; ++x) {
            if (!region.at(x, y)) continue;
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < box.x0 || nx > box.x1 || ny < box.y0 || ny > box.y1 || !region.at(nx, ny)) continue;
            const int a = quantize(gray.at(x, y), levels);
            const int b = quantize(gray.at(nx, ny), levels);
            m.p[static_cast<size_t>(a) * levels + b] += 1.0;
            m.p[static_cast<size_t>(b) * levels + a] += 1.0;
            ++pairs;
        }
    }
    if (pairs == 0) {
        m.degenerate = true;
        return m;
    }
    const double total = 2.0 * static_cast<double>(pairs);
    for (auto& v : m.p) v /= total;
    return m;
}

HaralickFeatures haralick(const GlcmMatrix& m) {
    HaralickFeatures f;
    if (m.degenerate) {
        f.degenerate = true;
        return f;
    }
    const int L = m.levels;
    double muI = 0;
    double muJ = 0;
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            const double p = m.at(i, j);
            const double d = i - j;
            f.contrast += p * d * d;
            f.dissimilarity += p * std::abs(d);
            f.homogeneity += p / (1.0 + d * d);
            f.asm_ += p * p;
            muI += i * p;
            muJ += j * p;
        }
    }
    double varI = 0;
    double varJ = 0;
    double cov = 0;
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            const double p = m.at(i, j);
            varI += p * (i - muI) * (i - muI);
            varJ += p * (j - muJ) * (j - muJ);
            cov += p * (i - muI) * (j - muJ);
        }
    }
    f.energy = std::sqrt(f.asm_);
    const double sigma = std::sqrt(varI) * std::sqrt(varJ);
    f.correlation = sigma > 1e-12 ? std::clamp(cov / sigma, -1.0, 1.0) : 0.0;
    return f;
}

FeatureVector featureVector(const BinaryMask& region, const ChannelSet& channels, int levels) {
    FeatureVector v{};
    const auto means = colorMeans(region, channels.gray, channels.green, channels.sat, channels.hue);
    std::copy(means.begin(), means.end(), v.begin());
    size_t k = 4;
    for (GlcmAngle angle : kGlcmAngles) {
        const auto h = haralick(glcm(channels.gray, region, angle, levels)).values();
        std::copy(h.begin(), h.end(), v.begin() + static_cast<std::ptrdiff_t>(k));
        k += h.size();
    }
    return v;
}

// =============================================================================
// t-SNE
// =============================================================================

std::vector<std::vector<double>> standardize(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const size_t n = rows.size();
    const size_t d = rows.front().size();
    std::vector<std::vector<double>> out(n, std::vector<double>(d, 0.0));
    for (size_t c = 0; c < d; ++c) {
        double mean = 0;
        for (const auto& r : rows) mean += r[c];
        mean /= static_cast<double>(n);
        double var = 0;
        for (const auto& r : rows) var += (r[c] - mean) * (r[c] - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        if (sd < 1e-12) continue;
        for (size_t i = 0; i < n; ++i) out[i][c] = (rows[i][c] - mean) / sd;
    }
    return out;
}

std::vector<double> tsneAffinities(const std::vector<std::vector<double>>& rows, double perplexity) {
    const size_t n = rows.size();
    std::vector<double> dist(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double s = 0;
            for (size_t c = 0; c < rows[i].size(); ++c) {
                const double d = rows[i][c] - rows[j][c];
                s += d * d;
            }
            dist[i * n + j] = dist[j * n + i] = s;
        }
    }

    const double targetEntropy = std::log(perplexity);
    std::vector<double> conditional(n * n, 0.0);
    std::vector<double> row(n);
    for (size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < 200; ++iter) {
            double sum = 0;
            double weighted = 0;
            for (size_t j = 0; j < n; ++j) {
                row[j] = j == i ? 0.0 : std::exp(-beta * dist[i * n + j]);
                sum += row[j];
                weighted += row[j] * dist[i * n + j];
            }
            if (sum <= 0) {
                // Bandwidth too narrow: every neighbor underflowed.
                hi = beta;
                beta = std::isinf(lo) ? beta / 2 : (beta + lo) / 2;
                continue;
            }
            const double entropy = std::log(sum) + beta * weighted / sum;
            for (size_t j = 0; j < n; ++j) conditional[i * n + j] = row[j] / sum;
            const double diff = entropy - targetEntropy;
            if (std::abs(diff) < 1e-10) break;
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2 : (beta + hi) / 2;
            } else {
                hi = beta;
                beta = std::isinf(lo) ? beta / 2 : (beta + lo) / 2;
            }
        }
    }

    std::vector<double> p(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            p[i * n + j] = (conditional[i * n + j] + conditional[j * n + i]) / (2.0 * static_cast<double>(n));
        }
    }
    return p;
}

namespace {

// Student-t numerators (1 + |yi - yj|^2)^-1 and their off-diagonal sum.
double studentKernel(const std::vector<std::array<double, 2>>& y, std::vector<double>& num) {
    const size_t n = y.size();
    num.assign(n * n, 0.0);
    double z = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double dx = y[i][0] - y[j][0];
            const double dy = y[i][1] - y[j][1];
            const double v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = num[j * n + i] = v;
            z += 2 * v;
        }
    }
    return z;
}

} // namespace

double tsneKl(const std::vector<double>& p, const std::vector<std::array<double, 2>>& y) {
    const size_t n = y.size();
    std::vector<double> num;
    const double z = studentKernel(y, num);
    double kl = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            const double pij = p[i * n + j];
            if (i == j || pij <= 0) continue;
            kl += pij * std::log(pij / (num[i * n + j] / z));
        }
    }
    return kl;
}

std::vector<std::array<double, 2>> tsneGradient(const std::vector<double>& p,
                                                const std::vector<std::array<double, 2>>& y) {
    const size_t n = y.size();
    std::vector<double> num;
    const double z = studentKernel(y, num);
    std::vector<std::array<double, 2>> grad(n, {0.0, 0.0});
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double v = num[i * n + j];
            const double coeff = 4.0 * (p[i * n + j] - v / z) * v;
            grad[i][0] += coeff * (y[i][0] - y[j][0]);
            grad[i][1] += coeff * (y[i][1] - y[j][1]);
        }
    }
    return grad;
}

TsneResult tsne(const std::vector<std::vector<double>>& rows, const TsneParams& params) {
    const size_t n = rows.size();
    if (n < 4) throw ParameterError("tsne: need at least 4 points");
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw ParameterError("tsne: ragged input");
        for (double v : r) {
            if (!std::isfinite(v)) throw ParameterError("tsne: non-finite input");
        }
    }
    double perplexity = params.perplexity;
    if (perplexity <= 0) {
        perplexity = std::min(30.0, static_cast<double>(n - 1) / 3.0);
    } else if (perplexity >= static_cast<double>(n) / 3.0) {
        throw ParameterError("tsne: perplexity must be below N/3");
    }
    if (params.iterations < 1 || !(params.learningRate > 0)) throw ParameterError("tsne: invalid optimizer settings");

    const std::vector<double> p = tsneAffinities(standardize(rows), perplexity);

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, params.initScale);
    std::vector<std::array<double, 2>> y(n);
    for (auto& pt : y) {
        pt[0] = normal(rng);
        pt[1] = normal(rng);
    }

    TsneResult result;
    result.initialKl = tsneKl(p, y);

    std::vector<double> exaggerated = p;
    for (auto& v : exaggerated) v *= params.exaggeration;
    std::vector<std::array<double, 2>> update(n, {0.0, 0.0});
    std::vector<std::array<double, 2>> gains(n, {1.0, 1.0});

    for (int iter = 0; iter < params.iterations; ++iter) {
        const bool early = iter < params.exaggerationIterations;
        const auto grad = tsneGradient(early ? exaggerated : p, y);
        const double momentum = early ? params.initialMomentum : params.finalMomentum;
        for (size_t i = 0; i < n; ++i) {
            for (int d = 0; d < 2; ++d) {
                const bool sameSign = (grad[i][d] > 0) == (update[i][d] > 0);
                gains[i][d] = sameSign ? std::max(gains[i][d] * 0.8, 0.01) : gains[i][d] + 0.2;
                update[i][d] = momentum * update[i][d] - params.learningRate * gains[i][d] * grad[i][d];
                y[i][d] += update[i][d];
            }
        }
        std::array<double, 2> mean{0.0, 0.0};
        for (const auto& pt : y) {
            mean[0] += pt[0];
            mean[1] += pt[1];
        }
        for (auto& pt : y) {
            pt[0] -= mean[0] / static_cast<double>(n);
            pt[1] -= mean[1] / static_cast<double>(n);
        }
    }
    result.finalKl = tsneKl(p, y);
    result.embedding = std::move(y);
    return result;
}

} // namespace rodseg
