#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "semmp/annotations.hpp"
#include "semmp/dataset.hpp"
#include "semmp/image.hpp"
#include "semmp/porometry.hpp"

namespace semmp::synthgen {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Synthetic SEM filter image parameters. Lengths in pixels, levels in gray values.
struct SynthConfig {
    int image_side = 1024;
    double pitch = 40.0;      ///< distance between pore centres
    double pore_side = 20.0;
    double skew_deg = 0.0;    ///< grid rotation about the image centre
    int n_particles = 0;
    Range particle_diameter{20.0, 60.0};
    double fiber_fraction = 0.0;
    Range fiber_length{80.0, 200.0};
    Range fiber_thickness{4.0, 10.0};
    double fiber_max_turn_deg = 8.0;  ///< per polyline joint
    double illumination_gradient = 40.0;
    double noise_sigma = 6.0;
    double background_level = 180.0;
    double pore_level = 30.0;
    Range particle_level{215.0, 245.0};
    std::uint64_t seed = 0;

    void validate() const;
};

/// Planted geometry of one instance: fibers report (polyline length, thickness),
/// blobs report (diameter, diameter).
struct InstanceInfo {
    annotations::ParticleClass cls = annotations::ParticleClass::Particle;
    double nominal_length = 0.0;
    double nominal_width = 0.0;
};

struct SynthSample {
    GrayImage image;
    std::vector<annotations::Annotation> annotations;  ///< category 0 particle, 1 fiber
    std::vector<InstanceInfo> instances;               ///< parallel to annotations
    porometry::PoreEstimate true_pore;
};

inline constexpr int kParticleCategory = 0;
inline constexpr int kFiberCategory = 1;

/// Square pore grid with an additive horizontal illumination ramp and Gaussian noise.
GrayImage generate_filter_background(const SynthConfig& cfg);

/// Background plus non-overlapping particles and fibers with exact polygon ground truth.
SynthSample generate_sample(const SynthConfig& cfg);

/**
 * Writes images/<id>.pgm, labels/<id>.txt, index.csv and true_pores.csv under
 * out_dir. Image i uses seed cfg.seed + i and filter type i mod 4.
 * Returns the index path.
 */
std::filesystem::path generate_dataset(const SynthConfig& cfg, int n_images, const std::filesystem::path& out_dir,
                                       int jobs = 1);

}  // namespace semmp::synthgen
