#include "semmp/synthgen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/core.h>

#include "semmp/error.hpp"
#include "semmp/parallel.hpp"
#include "semmp/rng.hpp"

namespace semmp::synthgen {

namespace fs = std::filesystem;
using annotations::Annotation;
using annotations::MaskRegion;
using annotations::ParticleClass;
using annotations::Point;
using annotations::Polygon;

namespace {

constexpr std::uint64_t kPlacementStream = 0x9E3779B97F4A7C15ULL;
constexpr int kMaxPlacementAttempts = 1000;

bool in_levels(double v) { return v >= 0.0 && v <= 255.0; }

void check_range(const Range& r, const char* name, double min_lo) {
    if (!(r.lo <= r.hi) || !(r.lo >= min_lo)) throw InvalidConfig(fmt::format("{} range ({}, {}) invalid", name, r.lo, r.hi));
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

struct PoreGrid {
    double centre;
    double cos_t;
    double sin_t;
    double pitch;
    double half;

    explicit PoreGrid(const SynthConfig& cfg)
        : centre(cfg.image_side / 2.0),
          cos_t(std::cos(radians(cfg.skew_deg))),
          sin_t(std::sin(radians(cfg.skew_deg))),
          pitch(cfg.pitch),
          half(cfg.pore_side / 2.0) {}

    // Half-open pore extent [-half, half) so an unskewed pore of integer side s covers s*s pixel centres.
    bool is_pore(int x, int y) const {
        const double dx = x + 0.5 - centre;
        const double dy = y + 0.5 - centre;
        const double u = cos_t * dx + sin_t * dy;
        const double v = -sin_t * dx + cos_t * dy;
        const double du = u - pitch * std::floor(u / pitch + 0.5);
        const double dv = v - pitch * std::floor(v / pitch + 0.5);
        return du >= -half && du < half && dv >= -half && dv < half;
    }

    // Pores whose four corners all fall inside the frame.
    std::size_t full_pores(int side) const {
        const int reach = static_cast<int>(std::ceil(side * std::numbers::sqrt2 / pitch)) + 1;
        std::size_t n = 0;
        for (int i = -reach; i <= reach; ++i) {
            for (int j = -reach; j <= reach; ++j) {
                bool inside = true;
                for (int corner = 0; corner < 4 && inside; ++corner) {
                    const double u = i * pitch + ((corner & 1) ? half : -half);
                    const double v = j * pitch + ((corner & 2) ? half : -half);
                    const double x = centre + cos_t * u - sin_t * v;
                    const double y = centre + sin_t * u + cos_t * v;
                    inside = x >= 0.0 && x <= side && y >= 0.0 && y <= side;
                }
                n += inside ? 1 : 0;
            }
        }
        return n;
    }
};

struct Painted {
    MaskRegion region;
    double level;
};

GrayImage render(const SynthConfig& cfg, const std::vector<Painted>& particles) {
    const int side = cfg.image_side;
    std::vector<double> level(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    const PoreGrid grid(cfg);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            level[static_cast<std::size_t>(y) * side + x] = grid.is_pore(x, y) ? cfg.pore_level : cfg.background_level;
        }
    }
    for (const auto& p : particles) {
        const auto& r = p.region;
        for (int y = 0; y < r.height; ++y) {
            for (int x = 0; x < r.width; ++x) {
                if (r.bits[static_cast<std::size_t>(y) * r.width + x]) {
                    level[static_cast<std::size_t>(r.y0 + y) * side + (r.x0 + x)] = p.level;
                }
            }
        }
    }

    Lcg64 noise(cfg.seed);
    GrayImage img(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double v = level[static_cast<std::size_t>(y) * side + x];
            v += cfg.illumination_gradient * ((x + 0.5) / side - 0.5);
            if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * noise.normal();
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
        }
    }
    return img;
}

// Snaps a normalized coordinate to the value a 6-decimal label file reproduces.
double quantize(double v) {
    const std::string s = fmt::format("{:.6f}", std::clamp(v, 0.0, 1.0));
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

std::vector<Point> blob_outline(Lcg64& rng, double diameter) {
    const int n = static_cast<int>(rng.uniform_int(6, 12));
    const double step = 2.0 * std::numbers::pi / n;
    const double base = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::vector<Point> pts;
    for (int k = 0; k < n; ++k) {
        // Jitter below half a step keeps angles ordered; points on a circle in order form a convex polygon.
        const double a = base + k * step + rng.uniform(-0.3, 0.3) * step;
        pts.push_back({0.5 * diameter * std::cos(a), 0.5 * diameter * std::sin(a)});
    }
    return pts;
}

std::vector<Point> fiber_outline(Lcg64& rng, double length, double thickness, double max_turn_deg) {
    const int segments = static_cast<int>(rng.uniform_int(3, 6));
    const double seg_len = length / segments;
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::vector<Point> centre{{0.0, 0.0}};
    std::vector<double> headings;
    for (int s = 0; s < segments; ++s) {
        if (s > 0) heading += radians(rng.uniform(-max_turn_deg, max_turn_deg));
        headings.push_back(heading);
        centre.push_back({centre.back().x + seg_len * std::cos(heading), centre.back().y + seg_len * std::sin(heading)});
    }
    double cx = 0.0, cy = 0.0;
    for (const auto& p : centre) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(centre.size());
    cy /= static_cast<double>(centre.size());

    // Miter offsets: left side forward, right side backward.
    std::vector<Point> left, right;
    for (std::size_t i = 0; i < centre.size(); ++i) {
        const double h_in = headings[i == 0 ? 0 : i - 1];
        const double h_out = headings[i == centre.size() - 1 ? i - 1 : i];
        const double nx_in = -std::sin(h_in), ny_in = std::cos(h_in);
        double nx = -std::sin(h_in) - std::sin(h_out);
        double ny = std::cos(h_in) + std::cos(h_out);
        const double len = std::hypot(nx, ny);
        nx /= len;
        ny /= len;
        const double scale = 0.5 * thickness / (nx * nx_in + ny * ny_in);
        const Point p{centre[i].x - cx, centre[i].y - cy};
        left.push_back({p.x + nx * scale, p.y + ny * scale});
        right.push_back({p.x - nx * scale, p.y - ny * scale});
    }
    std::vector<Point> outline = left;
    outline.insert(outline.end(), right.rbegin(), right.rend());
    return outline;
}

}  // namespace

void SynthConfig::validate() const {
    if (image_side < 8) throw InvalidConfig(fmt::format("image side {} too small", image_side));
    if (!(pitch > 0.0) || !(pore_side > 0.0) || !(pore_side < pitch)) {
        throw InvalidConfig(fmt::format("need 0 < pore_side < pitch, got pore_side {} pitch {}", pore_side, pitch));
    }
    if (n_particles < 0) throw InvalidConfig("particle count must be non-negative");
    if (!(fiber_fraction >= 0.0 && fiber_fraction <= 1.0)) throw InvalidConfig("fiber fraction must be in [0, 1]");
    check_range(particle_diameter, "particle diameter", 1.0);
    check_range(fiber_length, "fiber length", 1.0);
    check_range(fiber_thickness, "fiber thickness", 1.0);
    check_range(particle_level, "particle level", 0.0);
    if (!in_levels(particle_level.hi) || !in_levels(background_level) || !in_levels(pore_level)) {
        throw InvalidConfig("intensity levels must lie in [0, 255]");
    }
    if (!(noise_sigma >= 0.0) || !(illumination_gradient >= 0.0)) {
        throw InvalidConfig("noise sigma and illumination gradient must be non-negative");
    }
    if (!(fiber_max_turn_deg >= 0.0 && fiber_max_turn_deg < 60.0)) throw InvalidConfig("fiber turn must be in [0, 60) degrees");
}

GrayImage generate_filter_background(const SynthConfig& cfg) {
    cfg.validate();
    return render(cfg, {});
}

SynthSample generate_sample(const SynthConfig& cfg) {
    cfg.validate();
    const int side = cfg.image_side;
    const Size frame{side, side};

    SynthSample sample;
    const PoreGrid grid(cfg);
    sample.true_pore = porometry::PoreEstimate::from_area(cfg.pore_side * cfg.pore_side, grid.full_pores(side));

    Lcg64 rng(cfg.seed ^ kPlacementStream);
    BinaryMask occupied(side, side);
    std::vector<Painted> painted;
    const auto n_fibers = static_cast<int>(std::lround(cfg.fiber_fraction * cfg.n_particles));

    for (int k = 0; k < cfg.n_particles; ++k) {
        const bool fiber = k < n_fibers;
        const double level = rng.uniform(cfg.particle_level.lo, cfg.particle_level.hi);
        InstanceInfo info;
        std::vector<Point> shape;
        if (fiber) {
            info = {ParticleClass::Fiber, rng.uniform(cfg.fiber_length.lo, cfg.fiber_length.hi),
                    rng.uniform(cfg.fiber_thickness.lo, cfg.fiber_thickness.hi)};
            shape = fiber_outline(rng, info.nominal_length, info.nominal_width, cfg.fiber_max_turn_deg);
        } else {
            const double d = rng.uniform(cfg.particle_diameter.lo, cfg.particle_diameter.hi);
            info = {ParticleClass::Particle, d, d};
            shape = blob_outline(rng, d);
        }

        bool placed = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
            const double cx = rng.uniform(0.0, side);
            const double cy = rng.uniform(0.0, side);
            Polygon poly;
            bool inside = true;
            for (const auto& p : shape) {
                const double x = cx + p.x;
                const double y = cy + p.y;
                if (x < 1.0 || y < 1.0 || x > side - 1.0 || y > side - 1.0) {
                    inside = false;
                    break;
                }
                poly.vertices.push_back({quantize(x / side), quantize(y / side)});
            }
            if (!inside) continue;
            MaskRegion region = annotations::rasterize_region(poly, frame);
            if (region.count == 0) continue;

            bool overlaps = false;
            for (int y = 0; y < region.height && !overlaps; ++y) {
                for (int x = 0; x < region.width; ++x) {
                    if (region.bits[static_cast<std::size_t>(y) * region.width + x] && occupied.at(region.x0 + x, region.y0 + y)) {
                        overlaps = true;
                        break;
                    }
                }
            }
            if (overlaps) continue;

            for (int y = 0; y < region.height; ++y) {
                for (int x = 0; x < region.width; ++x) {
                    if (region.bits[static_cast<std::size_t>(y) * region.width + x]) occupied.set(region.x0 + x, region.y0 + y, true);
                }
            }
            sample.annotations.push_back({fiber ? kFiberCategory : kParticleCategory, std::move(poly), std::nullopt});
            sample.instances.push_back(info);
            painted.push_back({std::move(region), level});
            placed = true;
        }
        if (!placed) {
            throw PlacementFailure(fmt::format("instance {} could not be placed after {} attempts", k, kMaxPlacementAttempts));
        }
    }

    sample.image = render(cfg, painted);
    return sample;
}

fs::path generate_dataset(const SynthConfig& cfg, int n_images, const fs::path& out_dir, int jobs) {
    cfg.validate();
    if (n_images < 0) throw InvalidConfig("image count must be non-negative");
    std::error_code ec;
    fs::create_directories(out_dir / "images", ec);
    if (!ec) fs::create_directories(out_dir / "labels", ec);
    if (ec) throw IoFailure(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));

    std::vector<dataset::DatasetEntry> entries(static_cast<std::size_t>(n_images));
    std::vector<porometry::PoreEstimate> pores(static_cast<std::size_t>(n_images));
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        SynthConfig image_cfg = cfg;
        image_cfg.seed = cfg.seed + i;
        SynthSample sample = generate_sample(image_cfg);

        auto& e = entries[i];
        e.image_id = fmt::format("synth_{:04d}", i);
        e.filter_type = dataset::kAllFilterTypes[i % 4];
        e.image_path = fs::path("images") / (e.image_id + ".pgm");
        e.label_path = fs::path("labels") / (e.image_id + ".txt");
        save_image(sample.image, out_dir / e.image_path);
        std::ofstream labels(out_dir / e.label_path, std::ios::binary | std::ios::trunc);
        labels << annotations::write_label_file(sample.annotations, false);
        if (!labels) throw IoFailure("cannot write " + (out_dir / e.label_path).string());
        pores[i] = sample.true_pore;
    });

    const fs::path index_path = out_dir / "index.csv";
    dataset::write_index(entries, index_path);

    std::ofstream truth(out_dir / "true_pores.csv", std::ios::binary | std::ios::trunc);
    truth << porometry::kPoreCsvHeader << '\n';
    for (std::size_t i = 0; i < entries.size(); ++i) truth << porometry::format_pore_csv_row(entries[i].image_id, pores[i]) << '\n';
    if (!truth) throw IoFailure("cannot write true_pores.csv");
    return index_path;
}

}  // namespace semmp::synthgen
