#include "rap/image.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "rap/error.hpp"
#include "rap/rng.hpp"

namespace rap {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

Image from_bgr_mat(const cv::Mat& mat) {
    Image out;
    out.width = mat.cols;
    out.height = mat.rows;
    out.pixels.resize(static_cast<std::size_t>(mat.cols) * mat.rows * 3);
    for (int y = 0; y < mat.rows; ++y) {
        const auto* row = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < mat.cols; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * mat.cols + x) * 3;
            out.pixels[i] = row[x * 3 + 2];
            out.pixels[i + 1] = row[x * 3 + 1];
            out.pixels[i + 2] = row[x * 3];
        }
    }
    return out;
}

cv::Mat to_bgr_mat(const Image& image) {
    cv::Mat mat(image.height, image.width, CV_8UC3);
    for (int y = 0; y < image.height; ++y) {
        auto* row = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < image.width; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * image.width + x) * 3;
            row[x * 3] = image.pixels[i + 2];
            row[x * 3 + 1] = image.pixels[i + 1];
            row[x * 3 + 2] = image.pixels[i];
        }
    }
    return mat;
}

} // namespace

Image Image::solid(int width, int height, Rgb fill) {
    Image out;
    out.width = width;
    out.height = height;
    out.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
        out.pixels[i] = fill.r;
        out.pixels[i + 1] = fill.g;
        out.pixels[i + 2] = fill.b;
    }
    return out;
}

void Image::fill_rect(int x, int y, int w, int h, Rgb c) {
    const int x0 = std::max(0, x);
    const int y0 = std::max(0, y);
    const int x1 = std::min(width, x + w);
    const int y1 = std::min(height, y + h);
    for (int yy = y0; yy < y1; ++yy) {
        for (int xx = x0; xx < x1; ++xx) {
            set(xx, yy, c);
        }
    }
}

void validate_image(const Image& image) {
    if (image.width < 1 || image.height < 1) {
        throw InvalidInputError("image has a zero dimension");
    }
    const std::size_t expected = static_cast<std::size_t>(image.width) * image.height * 3;
    if (image.pixels.size() != expected) {
        throw InvalidInputError("pixel buffer size does not match dimensions");
    }
}

Image load_image(const std::filesystem::path& path) {
    if (path.extension() == ".raw") {
        return read_raw(path);
    }
    const auto bytes = read_file(path);
    cv::Mat mat = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8UC1,
                                       const_cast<std::uint8_t*>(bytes.data())),
                               cv::IMREAD_COLOR);
    if (mat.empty()) {
        throw IoError("cannot decode image: " + path.string());
    }
    return from_bgr_mat(mat);
}

Image read_raw(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 8) {
        throw IoError("raw image truncated: " + path.string());
    }
    auto read_u32 = [&](std::size_t at) {
        return static_cast<std::uint32_t>(bytes[at]) |
               (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
               (static_cast<std::uint32_t>(bytes[at + 2]) << 16) |
               (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
    };
    Image out;
    out.width = static_cast<int>(read_u32(0));
    out.height = static_cast<int>(read_u32(4));
    const std::size_t expected = static_cast<std::size_t>(out.width) * out.height * 3;
    if (bytes.size() != 8 + expected) {
        throw IoError("raw image payload size mismatch: " + path.string());
    }
    out.pixels.assign(bytes.begin() + 8, bytes.end());
    validate_image(out);
    return out;
}

void write_raw(const Image& image, const std::filesystem::path& path) {
    validate_image(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path.string());
    }
    auto put_u32 = [&](std::uint32_t v) {
        const char bytes[4] = {
            static_cast<char>(v & 0xff),
            static_cast<char>((v >> 8) & 0xff),
            static_cast<char>((v >> 16) & 0xff),
            static_cast<char>((v >> 24) & 0xff),
        };
        out.write(bytes, 4);
    };
    put_u32(static_cast<std::uint32_t>(image.width));
    put_u32(static_cast<std::uint32_t>(image.height));
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    validate_image(image);
    std::vector<std::uint8_t> buffer;
    if (!cv::imencode(".png", to_bgr_mat(image), buffer)) {
        throw IoError("PNG encoding failed");
    }
    return buffer;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    cv::Mat mat = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8UC1,
                                       const_cast<std::uint8_t*>(bytes.data())),
                               cv::IMREAD_COLOR);
    if (mat.empty()) {
        throw IoError("cannot decode PNG buffer");
    }
    return from_bgr_mat(mat);
}

void save_png(const Image& image, const std::filesystem::path& path) {
    const auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

std::uint64_t image_digest(const Image& image) {
    std::uint64_t hash = fnv1a64(&image.width, sizeof(image.width));
    hash = fnv1a64(&image.height, sizeof(image.height), hash);
    return fnv1a64(image.pixels.data(), image.pixels.size(), hash);
}

} // namespace rap
