#include "semmp/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "semmp/error.hpp"

namespace semmp::annotations {

namespace {

constexpr double kRangeSlack = 1e-6;

std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

double parse_number(std::string_view token, std::size_t line_no) {
    double value = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw MalformedLine(fmt::format("line {}: '{}' is not a number", line_no, token));
    }
    return value;
}

int parse_category(std::string_view token, std::size_t line_no) {
    int value = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end || value < 0) {
        throw MalformedLine(fmt::format("line {}: category '{}' is not a non-negative integer", line_no, token));
    }
    return value;
}

double unit_interval(double v, std::size_t line_no, const char* what) {
    if (v < -kRangeSlack || v > 1.0 + kRangeSlack) {
        throw OutOfRange(fmt::format("line {}: {} {} outside [0, 1]", line_no, what, v));
    }
    return std::clamp(v, 0.0, 1.0);
}

std::vector<Point> to_pixels(const Polygon& polygon, Size image) {
    std::vector<Point> pts;
    pts.reserve(polygon.vertices.size());
    for (const auto& v : polygon.vertices) pts.push_back({v.x * image.width, v.y * image.height});
    return pts;
}

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; collinear points dropped.
std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace

std::vector<Annotation> parse_label_file(std::string_view text, ConfidenceField field) {
    std::vector<Annotation> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto tokens = split_tokens(line);
        if (tokens.empty()) continue;

        const bool has_conf = field == ConfidenceField::Present ||
                              (field == ConfidenceField::Detect && tokens.size() % 2 == 0);
        const std::size_t first_coord = has_conf ? 2 : 1;
        if (tokens.size() < first_coord || (tokens.size() - first_coord) % 2 != 0) {
            throw MalformedLine(fmt::format("line {}: odd number of coordinates", line_no));
        }
        const std::size_t n_vertices = (tokens.size() - first_coord) / 2;
        if (n_vertices < 3) {
            throw MalformedLine(fmt::format("line {}: polygon needs at least 3 vertices, got {}", line_no, n_vertices));
        }

        Annotation a;
        a.category_id = parse_category(tokens[0], line_no);
        if (has_conf) a.confidence = unit_interval(parse_number(tokens[1], line_no), line_no, "confidence");
        a.polygon.vertices.reserve(n_vertices);
        for (std::size_t i = first_coord; i < tokens.size(); i += 2) {
            const double x = unit_interval(parse_number(tokens[i], line_no), line_no, "coordinate");
            const double y = unit_interval(parse_number(tokens[i + 1], line_no), line_no, "coordinate");
            a.polygon.vertices.push_back({x, y});
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::string write_label_file(const std::vector<Annotation>& annots, bool with_confidence) {
    std::string out;
    for (const auto& a : annots) {
        out += fmt::format("{}", a.category_id);
        if (with_confidence) out += fmt::format(" {:.6f}", a.confidence.value_or(1.0));
        for (const auto& v : a.polygon.vertices) out += fmt::format(" {:.6f} {:.6f}", v.x, v.y);
        out += '\n';
    }
    return out;
}

Box bounding_box(const Polygon& polygon, Size image) {
    Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : to_pixels(polygon, image)) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    if (polygon.vertices.empty()) b = {};
    return b;
}

bool MaskRegion::at(int x, int y) const {
    if (x < x0 || y < y0 || x >= x0 + width || y >= y0 + height) return false;
    return bits[static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x - x0)] != 0;
}

MaskRegion rasterize_region(const Polygon& polygon, Size image) {
    MaskRegion region;
    if (polygon.vertices.size() < 3 || image.width < 1 || image.height < 1) return region;

    const auto pts = to_pixels(polygon, image);
    const Box box = bounding_box(polygon, image);
    region.x0 = std::clamp(static_cast<int>(std::floor(box.x0)), 0, image.width);
    region.y0 = std::clamp(static_cast<int>(std::floor(box.y0)), 0, image.height);
    const int x1 = std::clamp(static_cast<int>(std::ceil(box.x1)) + 1, 0, image.width);
    const int y1 = std::clamp(static_cast<int>(std::ceil(box.y1)) + 1, 0, image.height);
    region.width = std::max(0, x1 - region.x0);
    region.height = std::max(0, y1 - region.y0);
    region.bits.assign(static_cast<std::size_t>(region.width) * static_cast<std::size_t>(region.height), 0);

    std::vector<double> crossings;
    for (int y = region.y0; y < y1; ++y) {
        const double yc = y + 0.5;
        crossings.clear();
        for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
            const Point& a = pts[j];
            const Point& b = pts[i];
            if ((a.y > yc) != (b.y > yc)) crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
            // centres with crossings[k] <= x + 0.5 < crossings[k + 1]
            const int from = std::max(region.x0, static_cast<int>(std::ceil(crossings[k] - 0.5)));
            const int to = std::min(x1, static_cast<int>(std::ceil(crossings[k + 1] - 0.5)));
            auto* row = region.bits.data() + static_cast<std::size_t>(y - region.y0) * static_cast<std::size_t>(region.width);
            for (int x = from; x < to; ++x) {
                if (!row[x - region.x0]) {
                    row[x - region.x0] = 1;
                    ++region.count;
                }
            }
        }
    }
    return region;
}

BinaryMask rasterize(const Polygon& polygon, int width, int height) {
    if (width < 1 || height < 1) throw InvalidConfig(fmt::format("raster size must be positive, got {}x{}", width, height));
    BinaryMask mask(width, height);
    const MaskRegion region = rasterize_region(polygon, {width, height});
    for (int y = 0; y < region.height; ++y) {
        for (int x = 0; x < region.width; ++x) {
            if (region.bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(region.width) + static_cast<std::size_t>(x)]) {
                mask.set(region.x0 + x, region.y0 + y, true);
            }
        }
    }
    return mask;
}

std::pair<double, double> min_area_rect_sides(std::vector<Point> points) {
    const auto hull = convex_hull(std::move(points));
    if (hull.size() < 3) return {0.0, 0.0};

    double best_area = std::numeric_limits<double>::infinity();
    std::pair<double, double> best{0.0, 0.0};
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % hull.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (len == 0.0) continue;
        const double ux = (b.x - a.x) / len;
        const double uy = (b.y - a.y) / len;
        double umin = 0, umax = 0, vmin = 0, vmax = 0;
        for (const auto& p : hull) {
            const double u = (p.x - a.x) * ux + (p.y - a.y) * uy;
            const double v = -(p.x - a.x) * uy + (p.y - a.y) * ux;
            umin = std::min(umin, u);
            umax = std::max(umax, u);
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
        const double du = umax - umin;
        const double dv = vmax - vmin;
        if (du * dv < best_area) {
            best_area = du * dv;
            best = {std::max(du, dv), std::min(du, dv)};
        }
    }
    return best;
}

ShapeMetrics shape_metrics(const Polygon& polygon, int width, int height) {
    const MaskRegion region = rasterize_region(polygon, {width, height});
    if (region.count == 0) throw DegeneratePolygon("polygon covers no pixel centre");
    const auto [length, thickness] = min_area_rect_sides(to_pixels(polygon, {width, height}));
    if (!(thickness > 0.0)) throw DegeneratePolygon("polygon has zero width");
    return {static_cast<double>(region.count), length, thickness, length / thickness};
}

}  // namespace semmp::annotations
