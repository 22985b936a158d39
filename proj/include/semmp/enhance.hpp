#pragma once

#include <cstdint>

#include "semmp/image.hpp"
#include "semmp/mask.hpp"

namespace semmp::enhance {

struct ClaheConfig {
    int tiles_x = 8;
    int tiles_y = 8;
    double clip_fraction = 0.01;
    int bins = 256;

    /// Throws InvalidConfig when a field is outside its allowed range.
    void validate() const;
};

/// Threshold t in [0, 254] maximizing w0 * w1 * (mu0 - mu1)^2 with class 0 = {v <= t}.
/// The smallest maximizer wins ties. Throws DegenerateImage for single-valued images.
int otsu_threshold(const GrayImage& img);

/// Foreground iff intensity > t.
BinaryMask binarize(const GrayImage& img, int threshold);

BinaryMask otsu_binarize(const GrayImage& img);

/**
 * Contrast limited adaptive histogram equalization.
 *
 * The image is split into tiles_x * tiles_y tiles (the last row/column absorbs
 * remainder pixels). Each tile histogram is clipped at
 * ceil(clip_fraction * tile_pixels); the excess is spread evenly over all bins,
 * the remainder one count per bin starting at bin 0. Output pixels
 * bilinearly blend the four nearest tile mappings.
 */
GrayImage clahe(const GrayImage& img, const ClaheConfig& cfg = {});

}  // namespace semmp::enhance
