#include "semmp/porometry.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "semmp/enhance.hpp"
#include "semmp/error.hpp"

namespace semmp::porometry {

namespace {

// Union-find over provisional labels; the smaller root wins so that final
// ids can be assigned in scan order afterwards.
class DisjointSet {
public:
    std::uint32_t make() {
        parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
        return parent_.back();
    }

    std::uint32_t find(std::uint32_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

    std::size_t size() const { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
};

}  // namespace

ComponentLabeling connected_components(const BinaryMask& mask, Connectivity connectivity) {
    const int w = mask.width();
    const int h = mask.height();
    ComponentLabeling out;
    out.size = mask.size();
    out.labels.assign(mask.size().area(), 0);

    DisjointSet sets;
    sets.make();  // provisional 0 = background
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            std::uint32_t neighbours[4];
            int n = 0;
            if (x > 0 && out.labels[idx(x - 1, y)]) neighbours[n++] = out.labels[idx(x - 1, y)];
            if (y > 0 && out.labels[idx(x, y - 1)]) neighbours[n++] = out.labels[idx(x, y - 1)];
            if (connectivity == Connectivity::Eight && y > 0) {
                if (x > 0 && out.labels[idx(x - 1, y - 1)]) neighbours[n++] = out.labels[idx(x - 1, y - 1)];
                if (x + 1 < w && out.labels[idx(x + 1, y - 1)]) neighbours[n++] = out.labels[idx(x + 1, y - 1)];
            }
            if (n == 0) {
                out.labels[idx(x, y)] = sets.make();
                continue;
            }
            std::uint32_t label = *std::min_element(neighbours, neighbours + n);
            for (int i = 0; i < n; ++i) sets.unite(label, neighbours[i]);
            out.labels[idx(x, y)] = label;
        }
    }

    // Second pass: relabel roots densely in order of first appearance.
    std::vector<std::uint32_t> final_id(sets.size(), 0);
    for (auto& label : out.labels) {
        if (!label) continue;
        auto& id = final_id[sets.find(label)];
        if (!id) {
            out.sizes.push_back(0);
            id = static_cast<std::uint32_t>(out.sizes.size());
        }
        label = id;
        ++out.sizes[label - 1];
    }
    out.count = out.sizes.size();
    return out;
}

PoreEstimate PoreEstimate::from_area(double area, std::size_t components) {
    PoreEstimate e;
    e.area_px2 = area;
    e.side_px = std::sqrt(area);
    e.diagonal_px = e.side_px * std::numbers::sqrt2;
    e.contributing_components = components;
    return e;
}

PoreEstimate estimate_from_mask(const BinaryMask& pore_mask, AreaBounds bounds) {
    if (bounds.max_px2 <= 0.0) bounds.max_px2 = AreaBounds::defaults_for(pore_mask.size()).max_px2;
    if (!(bounds.min_px2 >= 1.0) || !(bounds.min_px2 < bounds.max_px2)) {
        throw InvalidConfig(fmt::format("pore area bounds must satisfy 1 <= min < max, got ({}, {})", bounds.min_px2,
                                        bounds.max_px2));
    }

    const auto labeling = connected_components(pore_mask, Connectivity::Four);
    std::vector<std::size_t> kept;
    for (auto s : labeling.sizes) {
        const auto area = static_cast<double>(s);
        if (area >= bounds.min_px2 && area <= bounds.max_px2) kept.push_back(s);
    }
    if (kept.empty()) {
        throw NoPoresFound(fmt::format("none of {} components lies within area bounds [{}, {}]", labeling.count,
                                       bounds.min_px2, bounds.max_px2));
    }

    std::sort(kept.begin(), kept.end());
    const std::size_t mid = kept.size() / 2;
    const double median = kept.size() % 2 ? static_cast<double>(kept[mid])
                                          : 0.5 * static_cast<double>(kept[mid - 1] + kept[mid]);
    const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.05 * median)));

    // kept is sorted, so buckets come out in increasing order and the first
    // strict maximum is the smallest modal bucket.
    std::size_t best_begin = 0, best_count = 0;
    for (std::size_t i = 0; i < kept.size();) {
        const std::size_t bucket = kept[i] / width;
        std::size_t j = i;
        while (j < kept.size() && kept[j] / width == bucket) ++j;
        if (j - i > best_count) {
            best_count = j - i;
            best_begin = i;
        }
        i = j;
    }
    double sum = 0.0;
    for (std::size_t i = best_begin; i < best_begin + best_count; ++i) sum += static_cast<double>(kept[i]);
    return PoreEstimate::from_area(sum / static_cast<double>(best_count), best_count);
}

PoreEstimate estimate_pore_size(const GrayImage& img, AreaBounds bounds) {
    return estimate_from_mask(enhance::otsu_binarize(img).complement(), bounds);
}

std::string format_pore_csv_row(std::string_view image_id, const PoreEstimate& estimate) {
    return fmt::format("{},{},{},{},{}", image_id, estimate.area_px2, estimate.side_px, estimate.diagonal_px,
                       estimate.contributing_components);
}

std::map<std::string, PoreEstimate> parse_pore_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kPoreCsvHeader) {
        throw MalformedInput(fmt::format("pore CSV must start with '{}'", kPoreCsvHeader));
    }
    std::map<std::string, PoreEstimate> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        if (cells.size() != 5) throw MalformedInput(fmt::format("pore CSV line {}: expected 5 columns", line_no));
        double area = 0.0;
        std::size_t components = 0;
        const auto& a = cells[1];
        const auto& c = cells[4];
        auto r1 = std::from_chars(a.data(), a.data() + a.size(), area);
        auto r2 = std::from_chars(c.data(), c.data() + c.size(), components);
        if (r1.ec != std::errc() || r1.ptr != a.data() + a.size() || r2.ec != std::errc() ||
            r2.ptr != c.data() + c.size() || !(area > 0.0)) {
            throw MalformedInput(fmt::format("pore CSV line {}: bad numeric field", line_no));
        }
        out[cells[0]] = PoreEstimate::from_area(area, components);
    }
    return out;
}

}  // namespace semmp::porometry
