#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rap {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB image, row-major, tightly packed.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // width * height * 3 bytes

    static Image solid(int width, int height, Rgb fill);

    bool empty() const { return width <= 0 || height <= 0; }
    std::int64_t pixel_area() const {
        return static_cast<std::int64_t>(width) * height;
    }

    Rgb at(int x, int y) const {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }

    /// Fills the axis-aligned rectangle clipped to the image bounds.
    void fill_rect(int x, int y, int w, int h, Rgb c);

    bool operator==(const Image&) const = default;
};

/// Throws InvalidInputError unless dimensions and buffer size are consistent.
void validate_image(const Image& image);

/// Loads PNG/JPEG (by content) or the raw fixture format (.raw extension).
Image load_image(const std::filesystem::path& path);

/// Raw fixture format: width and height as 32-bit little-endian unsigned
/// integers, followed by width*height*3 RGB bytes.
Image read_raw(const std::filesystem::path& path);
void write_raw(const Image& image, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);
void save_png(const Image& image, const std::filesystem::path& path);

/// Content digest used as the crop-embedding cache key component.
std::uint64_t image_digest(const Image& image);

} // namespace rap
