#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semmp/image.hpp"
#include "semmp/mask.hpp"

namespace semmp::annotations {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// Vertices in normalized image coordinates, [0, 1] on both axes.
struct Polygon {
    std::vector<Point> vertices;
    friend bool operator==(const Polygon&, const Polygon&) = default;
};

/// Category 0 is "particle"; predictions carry a confidence, ground truth does not.
struct Annotation {
    int category_id = 0;
    Polygon polygon;
    std::optional<double> confidence;
    friend bool operator==(const Annotation&, const Annotation&) = default;
};

enum class ConfidenceField {
    Absent,   ///< `category x1 y1 ...`
    Present,  ///< `category confidence x1 y1 ...`
    Detect,   ///< by token-count parity: an even count means a confidence is present
};

/// One annotation per non-empty line. Coordinates within 1e-6 outside [0, 1]
/// are clamped; further out is OutOfRange.
std::vector<Annotation> parse_label_file(std::string_view text, ConfidenceField field);

inline std::vector<Annotation> parse_label_file(std::string_view text, bool expect_confidence) {
    return parse_label_file(text, expect_confidence ? ConfidenceField::Present : ConfidenceField::Absent);
}

/// Six decimals per coordinate (and confidence), single spaces, '\n' line ends.
std::string write_label_file(const std::vector<Annotation>& annots, bool with_confidence);

/// Pixel-space axis-aligned box, [x0, x1) x [y0, y1).
struct Box {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double area() const { return (x1 - x0) * (y1 - y0); }
};

Box bounding_box(const Polygon& polygon, Size image);

/// Rasterized polygon clipped to its own bounding rectangle. Used where many
/// small masks have to be compared on a large frame.
struct MaskRegion {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;
    std::size_t count = 0;

    bool at(int x, int y) const;  ///< frame coordinates
};

/// Even-odd scanline fill sampled at pixel centres (x + 0.5, y + 0.5).
MaskRegion rasterize_region(const Polygon& polygon, Size image);
BinaryMask rasterize(const Polygon& polygon, int width, int height);

struct ShapeMetrics {
    double area_px = 0.0;     ///< rasterized pixel count
    double length_px = 0.0;   ///< long side of the minimum-area rotated rectangle
    double width_px = 0.0;    ///< short side
    double elongation = 1.0;  ///< length / width
};

/// Throws DegeneratePolygon when the polygon covers no pixel centre or has zero width.
ShapeMetrics shape_metrics(const Polygon& polygon, int width, int height);

/// Side lengths (long, short) of the minimum-area enclosing rectangle of a
/// pixel-space point set, by rotating calipers over its convex hull.
std::pair<double, double> min_area_rect_sides(std::vector<Point> points);

enum class ParticleClass { Particle, Fiber };

inline ParticleClass classify_fiber(const ShapeMetrics& metrics, double ratio_threshold = 3.0) {
    return metrics.elongation >= ratio_threshold ? ParticleClass::Fiber : ParticleClass::Particle;
}

inline std::string_view to_string(ParticleClass c) {
    return c == ParticleClass::Fiber ? "fiber" : "particle";
}

}  // namespace semmp::annotations
