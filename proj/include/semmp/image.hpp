#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace semmp {

struct Size {
    int width = 0;
    int height = 0;

    std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    friend bool operator==(const Size&, const Size&) = default;
};

/**
 * 8-bit single-channel raster, row-major.
 *
 * The pixel buffer always holds exactly width * height values.
 */
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return size_.width; }
    int height() const { return size_.height; }
    Size size() const { return size_; }
    bool empty() const { return data_.empty(); }

    std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
    std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }

    std::span<const std::uint8_t> pixels() const { return data_; }
    std::span<std::uint8_t> pixels() { return data_; }
    std::span<const std::uint8_t> row(int y) const {
        return std::span<const std::uint8_t>(data_).subspan(index(0, y), static_cast<std::size_t>(size_.width));
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) + static_cast<std::size_t>(x);
    }

    Size size_{};
    std::vector<std::uint8_t> data_;
};

/// Reads an 8-bit PGM (P5) or PNG (gray, gray+alpha, RGB, RGBA or 8-bit palette).
/// Colour input is reduced to luma as (77 R + 150 G + 29 B) >> 8.
GrayImage load_image(const std::filesystem::path& path);

/// Writes binary PGM (P5, maxval 255).
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// In-memory PGM encoding, identical to the bytes save_image writes.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

/// Crops a side x side window whose top-left corner is
/// (floor((w - side) / 2), floor((h - side) / 2)).
GrayImage center_crop(const GrayImage& img, int side = 1024);

}  // namespace semmp
