#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "semmp/image.hpp"
#include "semmp/mask.hpp"

namespace semmp::porometry {

enum class Connectivity { Four = 4, Eight = 8 };

struct ComponentLabeling {
    Size size;
    std::vector<std::uint32_t> labels;  ///< 0 = background, components are 1..count
    std::vector<std::size_t> sizes;     ///< sizes[i] is the pixel count of label i + 1
    std::size_t count = 0;
};

/// Labels in raster-scan first-encounter order.
ComponentLabeling connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::Four);

struct AreaBounds {
    double min_px2 = 25.0;
    double max_px2 = 0.0;  ///< 0 selects 10% of the image area

    static AreaBounds defaults_for(Size image) { return {25.0, 0.1 * static_cast<double>(image.area())}; }
};

/// Square-pore model: side = sqrt(area), diagonal = side * sqrt(2).
struct PoreEstimate {
    double area_px2 = 0.0;
    double side_px = 0.0;
    double diagonal_px = 0.0;
    std::size_t contributing_components = 0;

    static PoreEstimate from_area(double area, std::size_t components);
};

/**
 * Otsu binarization, inversion (pores are dark), 4-connected labeling,
 * then the modal size among components within `bounds`. Sizes are bucketed
 * with width max(1, round(0.05 * median)); the smaller bucket wins ties and
 * the estimate is the mean size inside the modal bucket.
 */
PoreEstimate estimate_pore_size(const GrayImage& img, AreaBounds bounds = {});

/// The size-mode step alone, on an already inverted pore mask.
PoreEstimate estimate_from_mask(const BinaryMask& pore_mask, AreaBounds bounds);

inline constexpr std::string_view kPoreCsvHeader = "image_id,pore_area_px2,pore_side_px,pore_diagonal_px,components";

/// One CSV record, no trailing newline. Values are written in shortest round-trip form.
std::string format_pore_csv_row(std::string_view image_id, const PoreEstimate& estimate);

/// Keyed by image id; the header line is required.
std::map<std::string, PoreEstimate> parse_pore_csv(std::string_view text);

}  // namespace semmp::porometry
