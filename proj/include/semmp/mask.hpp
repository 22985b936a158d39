#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "semmp/image.hpp"

namespace semmp {

/// Foreground/background raster. Stored one byte per pixel (0 or 1).
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false)
        : size_{width, height}, bits_(Size{width, height}.area(), fill ? 1 : 0) {}

    int width() const { return size_.width; }
    int height() const { return size_.height; }
    Size size() const { return size_; }

    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }

    std::span<const std::uint8_t> bits() const { return bits_; }
    std::span<std::uint8_t> bits() { return bits_; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    BinaryMask complement() const {
        BinaryMask out = *this;
        for (auto& b : out.bits_) b = b ? 0 : 1;
        return out;
    }

    /// 0 / 255 rendering, used when a mask is written as an image.
    GrayImage to_image() const {
        GrayImage img(size_.width, size_.height);
        auto px = img.pixels();
        for (std::size_t i = 0; i < bits_.size(); ++i) px[i] = bits_[i] ? 255 : 0;
        return img;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) + static_cast<std::size_t>(x);
    }

    Size size_{};
    std::vector<std::uint8_t> bits_;
};

}  // namespace semmp
