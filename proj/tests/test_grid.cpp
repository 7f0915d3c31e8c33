#include <doctest.h>

#include <filesystem>

#include "rap/error.hpp"
#include "rap/grid.hpp"
#include "rap/rng.hpp"

using namespace rap;

namespace {

Image noise_image(int width, int height, std::uint64_t seed) {
    Image img = Image::solid(width, height, Rgb{0, 0, 0});
    SplitMix64 rng(seed);
    for (auto& byte : img.pixels) {
        byte = static_cast<std::uint8_t>(rng.next() & 0xff);
    }
    return img;
}

// Independent ceiling-division oracle for the partition arithmetic.
int ceil_div(int a, int b) {
    return (a + b - 1) / b;
}

} // namespace

TEST_CASE("partition: 8192x8192 at cell 448 gives a 19x19 grid") {
    const CropGrid grid = partition(Image::solid(8192, 8192, Rgb{9, 9, 9}), 448);
    CHECK(grid.rows() == ceil_div(8192, 448));
    CHECK(grid.cols() == ceil_div(8192, 448));
    CHECK(grid.rows() == 19);
    CHECK(grid.cell_count() == 361);
}

TEST_CASE("partition: image equal to one cell is a single crop") {
    const Image img = noise_image(448, 448, 1);
    const CropGrid grid = partition(img, 448);
    REQUIRE(grid.rows() == 1);
    REQUIRE(grid.cols() == 1);
    const Crop crop = grid.crop_at(0, 0);
    CHECK(crop.rect == PixelRect{0, 0, 448, 448});
    CHECK(crop.pixels == img);
}

TEST_CASE("partition: ragged edges keep their remainder") {
    const CropGrid grid = partition(Image::solid(900, 450, Rgb{1, 2, 3}), 448);
    CHECK(grid.rows() == 2);
    CHECK(grid.cols() == 3);
    CHECK(grid.rect_at(1, 2) == PixelRect{896, 448, 4, 2});
    // Interior cells are full-sized.
    CHECK(grid.rect_at(0, 0) == PixelRect{0, 0, 448, 448});
    CHECK(grid.rect_at(0, 1) == PixelRect{448, 0, 448, 448});
}

TEST_CASE("partition rejects bad inputs") {
    Image degenerate;
    degenerate.width = 0;
    degenerate.height = 10;
    CHECK_THROWS_AS(partition(std::move(degenerate), 448), InvalidInputError);

    Image inconsistent = Image::solid(4, 4, Rgb{});
    inconsistent.pixels.pop_back();
    CHECK_THROWS_AS(partition(std::move(inconsistent), 448), InvalidInputError);

    CHECK_THROWS_AS(partition(Image::solid(64, 64, Rgb{}), 15), InvalidConfigError);
    CHECK_THROWS_AS(partition(std::shared_ptr<const Image>{}, 448), InvalidInputError);
}

TEST_CASE("crop_at: bounds and origin") {
    const CropGrid grid = partition(noise_image(100, 60, 2), 32);
    CHECK(grid.crop_at(0, 0).rect.x == 0);
    CHECK(grid.crop_at(0, 0).rect.y == 0);
    CHECK_THROWS_AS(grid.crop_at(-1, 0), IndexError);
    CHECK_THROWS_AS(grid.crop_at(grid.rows(), 0), IndexError);
    CHECK_THROWS_AS(grid.crop_at(0, grid.cols()), IndexError);
}

TEST_CASE("crops tile the source exactly") {
    const Image img = noise_image(101, 67, 3);
    const CropGrid grid = partition(img, 32);

    SUBCASE("every pixel is covered by exactly one cell") {
        std::vector<int> covered(static_cast<std::size_t>(img.width) * img.height, 0);
        for (int r = 0; r < grid.rows(); ++r) {
            for (int c = 0; c < grid.cols(); ++c) {
                const PixelRect rect = grid.rect_at(r, c);
                CHECK(rect.w <= grid.cell_size());
                CHECK(rect.h <= grid.cell_size());
                CHECK(rect.w >= 1);
                CHECK(rect.h >= 1);
                for (int y = rect.y; y < rect.y + rect.h; ++y) {
                    for (int x = rect.x; x < rect.x + rect.w; ++x) {
                        covered[static_cast<std::size_t>(y) * img.width + x] += 1;
                    }
                }
            }
        }
        for (int count : covered) {
            REQUIRE(count == 1);
        }
    }

    SUBCASE("reassembling all crops reconstructs the source bit-exactly") {
        Image rebuilt = Image::solid(img.width, img.height, Rgb{0, 0, 0});
        for (int r = 0; r < grid.rows(); ++r) {
            for (int c = 0; c < grid.cols(); ++c) {
                const Crop crop = grid.crop_at(r, c);
                for (int y = 0; y < crop.rect.h; ++y) {
                    for (int x = 0; x < crop.rect.w; ++x) {
                        rebuilt.set(crop.rect.x + x, crop.rect.y + y, crop.pixels.at(x, y));
                    }
                }
            }
        }
        CHECK(rebuilt == img);
    }
}

TEST_CASE("crop count law holds over random sizes") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 1 + static_cast<int>(rng.next_below(300));
        const int h = 1 + static_cast<int>(rng.next_below(300));
        const int cell = 16 + static_cast<int>(rng.next_below(64));
        const CropGrid grid = partition(Image::solid(w, h, Rgb{}), cell);
        REQUIRE(grid.cell_count() == ceil_div(w, cell) * ceil_div(h, cell));
    }
}

TEST_CASE("raw fixture format round-trips") {
    const Image img = noise_image(33, 17, 4);
    const auto path = std::filesystem::temp_directory_path() / "rap_grid_roundtrip.raw";
    write_raw(img, path);
    const Image back = read_raw(path);
    CHECK(back == img);
    CHECK(load_image(path) == img);
    std::filesystem::remove(path);
}

TEST_CASE("png codec round-trips losslessly") {
    const Image img = noise_image(40, 25, 5);
    CHECK(decode_png(encode_png(img)) == img);
}

TEST_CASE("missing image file raises an IO error") {
    CHECK_THROWS_AS(load_image("/nonexistent/rap-test.png"), IoError);
    CHECK_THROWS_AS(read_raw("/nonexistent/rap-test.raw"), IoError);
}
