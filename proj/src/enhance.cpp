#include "semmp/enhance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <fmt/core.h>

#include "semmp/error.hpp"

namespace semmp::enhance {

void ClaheConfig::validate() const {
    if (tiles_x < 1 || tiles_y < 1) {
        throw InvalidConfig(fmt::format("CLAHE tile grid must be at least 1x1, got {}x{}", tiles_x, tiles_y));
    }
    if (bins < 2 || bins > 256) throw InvalidConfig(fmt::format("CLAHE bins must be in [2, 256], got {}", bins));
    if (!(clip_fraction > 0.0 && clip_fraction <= 1.0)) {
        throw InvalidConfig(fmt::format("CLAHE clip fraction must be in (0, 1], got {}", clip_fraction));
    }
}

namespace {

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram(const GrayImage& img) {
    Histogram h{};
    for (auto v : img.pixels()) ++h[v];
    return h;
}

}  // namespace

int otsu_threshold(const GrayImage& img) {
    const Histogram h = histogram(img);
    const auto distinct = std::count_if(h.begin(), h.end(), [](auto c) { return c > 0; });
    if (distinct < 2) throw DegenerateImage("Otsu threshold needs at least two distinct intensities");

    const double total = static_cast<double>(img.pixels().size());
    std::uint64_t total_sum = 0;
    for (int v = 0; v < 256; ++v) total_sum += h[v] * static_cast<std::uint64_t>(v);

    // Class sums are kept in integers so equal partitions give bit-equal scores.
    std::uint64_t n0 = 0;
    std::uint64_t s0 = 0;
    int best_t = 0;
    double best_score = -1.0;
    for (int t = 0; t < 255; ++t) {
        n0 += h[t];
        s0 += h[t] * static_cast<std::uint64_t>(t);
        const std::uint64_t n1 = img.pixels().size() - n0;
        double score = 0.0;
        if (n0 > 0 && n1 > 0) {
            const double w0 = static_cast<double>(n0) / total;
            const double w1 = static_cast<double>(n1) / total;
            const double mu0 = static_cast<double>(s0) / static_cast<double>(n0);
            const double mu1 = static_cast<double>(total_sum - s0) / static_cast<double>(n1);
            score = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        }
        if (score > best_score) {
            best_score = score;
            best_t = t;
        }
    }
    return best_t;
}

BinaryMask binarize(const GrayImage& img, int threshold) {
    if (threshold < 0 || threshold > 254) throw InvalidConfig(fmt::format("threshold {} outside [0, 254]", threshold));
    BinaryMask mask(img.width(), img.height());
    auto src = img.pixels();
    auto dst = mask.bits();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > threshold ? 1 : 0;
    return mask;
}

BinaryMask otsu_binarize(const GrayImage& img) {
    return binarize(img, otsu_threshold(img));
}

namespace {

using Lut = std::array<std::uint8_t, 256>;

struct TileSpan {
    int begin;
    int end;
    double center;
};

std::vector<TileSpan> tile_spans(int extent, int tiles) {
    const int step = extent / tiles;
    std::vector<TileSpan> spans;
    spans.reserve(static_cast<std::size_t>(tiles));
    for (int i = 0; i < tiles; ++i) {
        const int begin = i * step;
        const int end = (i == tiles - 1) ? extent : begin + step;
        spans.push_back({begin, end, (begin + end - 1) / 2.0});
    }
    return spans;
}

Lut tile_lut(const GrayImage& img, const TileSpan& xs, const TileSpan& ys, const ClaheConfig& cfg) {
    Histogram values{};
    for (int y = ys.begin; y < ys.end; ++y) {
        for (int x = xs.begin; x < xs.end; ++x) ++values[img.at(x, y)];
    }

    Lut lut{};
    if (std::count_if(values.begin(), values.end(), [](auto c) { return c > 0; }) == 1) {
        for (int v = 0; v < 256; ++v) lut[v] = static_cast<std::uint8_t>(v);
        return lut;
    }

    const auto bins = static_cast<std::size_t>(cfg.bins);
    std::vector<std::uint64_t> hist(bins, 0);
    for (int v = 0; v < 256; ++v) hist[static_cast<std::size_t>(v) * bins / 256] += values[v];

    const std::uint64_t n = static_cast<std::uint64_t>(xs.end - xs.begin) * static_cast<std::uint64_t>(ys.end - ys.begin);
    const auto limit = static_cast<std::uint64_t>(std::ceil(cfg.clip_fraction * static_cast<double>(n)));
    std::uint64_t excess = 0;
    for (auto& c : hist) {
        if (c > limit) {
            excess += c - limit;
            c = limit;
        }
    }
    const std::uint64_t share = excess / bins;
    const std::uint64_t residue = excess % bins;
    for (std::size_t b = 0; b < bins; ++b) hist[b] += share + (b < residue ? 1 : 0);

    std::vector<std::uint64_t> cdf(bins);
    std::uint64_t running = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        running += hist[b];
        cdf[b] = running;
    }
    for (int v = 0; v < 256; ++v) {
        const std::uint64_t c = cdf[static_cast<std::size_t>(v) * bins / 256];
        lut[v] = static_cast<std::uint8_t>(std::min<std::uint64_t>(255, (2 * 255 * c + n) / (2 * n)));
    }
    return lut;
}

struct Blend {
    int lo;
    int hi;
    double weight;  // of hi
};

std::vector<Blend> blend_table(int extent, const std::vector<TileSpan>& spans) {
    std::vector<Blend> table(static_cast<std::size_t>(extent));
    const int last = static_cast<int>(spans.size()) - 1;
    int tile = 0;
    for (int p = 0; p < extent; ++p) {
        if (p <= spans.front().center) {
            table[p] = {0, 0, 0.0};
        } else if (p >= spans.back().center) {
            table[p] = {last, last, 0.0};
        } else {
            while (tile + 1 < last && spans[tile + 1].center <= p) ++tile;
            const double w = (p - spans[tile].center) / (spans[tile + 1].center - spans[tile].center);
            table[p] = {tile, tile + 1, w};
        }
    }
    return table;
}

}  // namespace

GrayImage clahe(const GrayImage& img, const ClaheConfig& cfg) {
    cfg.validate();
    if (img.width() < cfg.tiles_x || img.height() < cfg.tiles_y) {
        throw ImageTooSmall(fmt::format("{}x{} image is smaller than the {}x{} tile grid", img.width(), img.height(),
                                        cfg.tiles_x, cfg.tiles_y));
    }

    const auto xs = tile_spans(img.width(), cfg.tiles_x);
    const auto ys = tile_spans(img.height(), cfg.tiles_y);
    std::vector<Lut> luts;
    luts.reserve(xs.size() * ys.size());
    for (const auto& ty : ys) {
        for (const auto& tx : xs) luts.push_back(tile_lut(img, tx, ty, cfg));
    }
    auto lut_at = [&](int tx, int ty) -> const Lut& { return luts[static_cast<std::size_t>(ty) * xs.size() + tx]; };

    const auto col_blend = blend_table(img.width(), xs);
    const auto row_blend = blend_table(img.height(), ys);

    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        const Blend& rb = row_blend[y];
        for (int x = 0; x < img.width(); ++x) {
            const Blend& cb = col_blend[x];
            const auto v = img.at(x, y);
            const double top = (1.0 - cb.weight) * lut_at(cb.lo, rb.lo)[v] + cb.weight * lut_at(cb.hi, rb.lo)[v];
            const double bottom = (1.0 - cb.weight) * lut_at(cb.lo, rb.hi)[v] + cb.weight * lut_at(cb.hi, rb.hi)[v];
            const double value = (1.0 - rb.weight) * top + rb.weight * bottom;
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(value), 0, 255));
        }
    }
    return out;
}

}  // namespace semmp::enhance
