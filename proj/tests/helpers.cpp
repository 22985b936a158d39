#include "helpers.hpp"

#include <png.h>

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace testing {

semmp::annotations::Polygon rotated_rect(double cx, double cy, double length, double width, double deg, int w, int h) {
    const double a = deg * std::numbers::pi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    semmp::annotations::Polygon poly;
    for (auto [u, v] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}) {
        const double x = u * length, y = v * width;
        poly.vertices.push_back({(cx + c * x - s * y) / w, (cy + s * x + c * y) / h});
    }
    return poly;
}

bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string* diff) {
    auto collect = [](const std::filesystem::path& root) {
        std::map<std::string, std::string> files;
        for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
            if (e.is_regular_file()) files[e.path().lexically_relative(root).generic_string()] = slurp(e.path());
        }
        return files;
    };
    const auto fa = collect(a), fb = collect(b);
    if (fa == fb) return true;
    if (diff) {
        for (const auto& [k, v] : fa) {
            auto it = fb.find(k);
            if (it == fb.end()) *diff += "missing in second: " + k + "\n";
            else if (it->second != v) *diff += "differs: " + k + "\n";
        }
        for (const auto& [k, v] : fb) {
            if (!fa.count(k)) *diff += "missing in first: " + k + "\n";
        }
    }
    return false;
}

void write_png(const std::filesystem::path& p, int w, int h, int channels, const std::vector<std::uint8_t>& samples,
               int bit_depth) {
    FILE* fp = std::fopen(p.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + p.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("png write failed");
    }
    png_init_io(png, fp);
    const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA;
    png_set_IHDR(png, info, w, h, bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(w) * channels * (bit_depth / 8);
    for (int y = 0; y < h; ++y) png_write_row(png, const_cast<png_bytep>(samples.data() + stride * y));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace testing
