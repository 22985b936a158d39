#include "semmp/image.hpp"

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <fmt/core.h>

#include "semmp/error.hpp"

namespace semmp {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : size_{width, height} {
    if (width <= 0 || height <= 0) {
        throw InvalidConfig(fmt::format("image dimensions must be positive, got {}x{}", width, height));
    }
    data_.assign(size_.area(), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : size_{width, height}, data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
        throw InvalidConfig(fmt::format("image dimensions must be positive, got {}x{}", width, height));
    }
    if (data_.size() != size_.area()) {
        throw InvalidConfig(fmt::format("pixel buffer holds {} values, expected {}", data_.size(), size_.area()));
    }
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoFailure("read error on " + path.string());
    return bytes;
}

// Netpbm header tokenizer: whitespace separated, '#' comments to end of line.
class PgmHeader {
public:
    explicit PgmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    long next_number() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw CorruptData("malformed PGM header");
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1L << 30)) throw CorruptData("PGM header value out of range");
            ++pos_;
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw CorruptData("malformed PGM header");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

struct PngMemoryReader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* reader = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
    if (reader->pos + count > reader->bytes.size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, reader->bytes.data() + reader->pos, count);
    reader->pos += count;
}

enum class PngStatus { Ok, Corrupt, Unsupported };

struct PngMessage {
    char* text;
    std::size_t len;
};

// Keeps libpng quiet on stderr; the message ends up in the thrown exception.
[[noreturn]] void png_on_error(png_structp png, png_const_charp msg) {
    auto* sink = static_cast<PngMessage*>(png_get_error_ptr(png));
    std::snprintf(sink->text, sink->len, "PNG decode error: %s", msg);
    png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

struct PngDecoded {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> samples;
};

// libpng reports errors with longjmp, so this function keeps only trivially
// destructible state between setjmp and the decode calls that can jump.
PngStatus decode_png_raw(std::span<const std::uint8_t> bytes, PngDecoded& out, char* message,
                         std::size_t message_len) {
    PngMessage sink{message, message_len};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_on_error, png_on_warning);
    if (!png) return PngStatus::Corrupt;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return PngStatus::Corrupt;
    }
    PngMemoryReader reader{bytes, 0};
    png_bytep* volatile rows = nullptr;

    if (setjmp(png_jmpbuf(png))) {
        delete[] rows;
        png_destroy_read_struct(&png, &info, nullptr);
        return PngStatus::Corrupt;
    }

    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::snprintf(message, message_len, "PNG bit depth %d (only 8 supported)", bit_depth);
        return PngStatus::Unsupported;
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_set_strip_16(png);
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.samples.resize(stride * static_cast<std::size_t>(out.height));

    rows = new png_bytep[static_cast<std::size_t>(out.height)];
    for (int y = 0; y < out.height; ++y) rows[y] = out.samples.data() + stride * static_cast<std::size_t>(y);
    png_read_image(png, rows);
    png_read_end(png, nullptr);

    delete[] rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return PngStatus::Ok;
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
    PngDecoded raw;
    char message[128] = {};
    switch (decode_png_raw(bytes, raw, message, sizeof message)) {
        case PngStatus::Corrupt: throw CorruptData(message);
        case PngStatus::Unsupported: throw UnsupportedFormat(message);
        case PngStatus::Ok: break;
    }
    if (raw.width <= 0 || raw.height <= 0) throw CorruptData("PNG has zero size");

    std::vector<std::uint8_t> gray(static_cast<std::size_t>(raw.width) * static_cast<std::size_t>(raw.height));
    if (raw.channels == 1) {
        gray = std::move(raw.samples);
    } else if (raw.channels == 3) {
        for (std::size_t i = 0; i < gray.size(); ++i) {
            const unsigned r = raw.samples[3 * i];
            const unsigned g = raw.samples[3 * i + 1];
            const unsigned b = raw.samples[3 * i + 2];
            gray[i] = static_cast<std::uint8_t>((77 * r + 150 * g + 29 * b) >> 8);
        }
    } else {
        throw UnsupportedFormat(fmt::format("PNG with {} channels after alpha strip", raw.channels));
    }
    return GrayImage(raw.width, raw.height, std::move(gray));
}

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw UnsupportedFormat("not a binary PGM (P5)");
    PgmHeader header(bytes);
    const long width = header.next_number();
    const long height = header.next_number();
    const long maxval = header.next_number();
    if (width <= 0 || height <= 0) throw CorruptData("PGM dimensions must be positive");
    if (maxval <= 0 || maxval > 255) throw UnsupportedFormat(fmt::format("PGM maxval {} is not 8-bit", maxval));
    const std::size_t offset = header.raster_offset();
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() < offset + count) {
        throw CorruptData(fmt::format("PGM payload truncated: {} of {} bytes", bytes.size() - std::min(offset, bytes.size()), count));
    }
    std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(offset + count));
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    const std::string header = fmt::format("P5\n{} {}\n255\n", img.width(), img.height());
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
    throw UnsupportedFormat("unknown magic in " + path.string());
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    const auto bytes = encode_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoFailure("write failed on " + path.string());
}

GrayImage center_crop(const GrayImage& img, int side) {
    if (side <= 0) throw InvalidConfig(fmt::format("crop side must be positive, got {}", side));
    if (img.width() < side || img.height() < side) {
        throw ImageTooSmall(fmt::format("{}x{} image cannot be cropped to {}", img.width(), img.height(), side));
    }
    const int ox = (img.width() - side) / 2;
    const int oy = (img.height() - side) / 2;
    GrayImage out(side, side);
    auto dst = out.pixels();
    for (int y = 0; y < side; ++y) {
        auto src = img.row(y + oy).subspan(static_cast<std::size_t>(ox), static_cast<std::size_t>(side));
        std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(y) * side);
    }
    return out;
}

}  // namespace semmp
