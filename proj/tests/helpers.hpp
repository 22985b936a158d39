#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semmp/annotations.hpp"
#include "semmp/image.hpp"

namespace testing {

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "semmp") {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

inline semmp::GrayImage random_image(std::mt19937_64& rng, int w, int h, int lo = 0, int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    semmp::GrayImage img(w, h);
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(dist(rng));
    return img;
}

/// Axis-aligned rectangle in pixel units, normalized against a w x h frame.
inline semmp::annotations::Polygon pixel_rect(double x0, double y0, double x1, double y1, int w, int h) {
    return {{{x0 / w, y0 / h}, {x1 / w, y0 / h}, {x1 / w, y1 / h}, {x0 / w, y1 / h}}};
}

/// Rectangle of the given size centred at (cx, cy) and rotated by deg, normalized.
semmp::annotations::Polygon rotated_rect(double cx, double cy, double length, double width, double deg, int w, int h);

/// Byte-wise comparison of two directory trees (relative paths and contents).
bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string* diff = nullptr);

/// Writes an 8-bit (or 16-bit) PNG through libpng.
void write_png(const std::filesystem::path& p, int w, int h, int channels, const std::vector<std::uint8_t>& samples,
               int bit_depth = 8);

}  // namespace testing
