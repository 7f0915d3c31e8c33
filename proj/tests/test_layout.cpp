#include <doctest.h>

#include "rap/error.hpp"
#include "rap/layout.hpp"
#include "rap/rng.hpp"

using namespace rap;

namespace {

// Every cell gets a distinct solid color so bit-exact placement is checkable.
Image cell_coded_image(int rows, int cols, int cell) {
    Image img = Image::solid(cols * cell, rows * cell, Rgb{0, 0, 0});
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int index = r * cols + c;
            img.fill_rect(c * cell, r * cell, cell, cell,
                          Rgb{static_cast<std::uint8_t>(1 + index * 7),
                              static_cast<std::uint8_t>(65 + index * 5),
                              static_cast<std::uint8_t>(129 + index * 3)});
        }
    }
    return img;
}

RetentionMask mask_from_rows(int cols, const std::vector<std::vector<int>>& rows) {
    RetentionMask m = RetentionMask::zeros(static_cast<int>(rows.size()), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m.set(static_cast<int>(r), static_cast<int>(c), rows[r][c] != 0);
        }
    }
    return m;
}

Image canvas_cell(const Canvas& canvas, int row, int col) {
    Image out = Image::solid(canvas.cell_size, canvas.cell_size, Rgb{0, 0, 0});
    for (int y = 0; y < canvas.cell_size; ++y) {
        for (int x = 0; x < canvas.cell_size; ++x) {
            out.set(x, y, canvas.image.at(col * canvas.cell_size + x,
                                          row * canvas.cell_size + y));
        }
    }
    return out;
}

Image padded_crop(const CropGrid& grid, int row, int col) {
    Image out = Image::solid(grid.cell_size(), grid.cell_size(), Rgb{0, 0, 0});
    const Crop crop = grid.crop_at(row, col);
    for (int y = 0; y < crop.pixels.height; ++y) {
        for (int x = 0; x < crop.pixels.width; ++x) {
            out.set(x, y, crop.pixels.at(x, y));
        }
    }
    return out;
}

void check_layout_properties(const CropGrid& grid, const RetentionMask& mask) {
    const CompressedMask compressed = compress_mask(mask);
    const Canvas canvas = spatial_layout(grid, mask);

    // Minimality: no all-zero row or column survives.
    for (int r = 0; r < compressed.rows; ++r) {
        bool any = false;
        for (int c = 0; c < compressed.cols; ++c) any = any || compressed.at(r, c);
        REQUIRE(any);
    }
    for (int c = 0; c < compressed.cols; ++c) {
        bool any = false;
        for (int r = 0; r < compressed.rows; ++r) any = any || compressed.at(r, c);
        REQUIRE(any);
    }

    // Order preservation across every retained pair, both axes.
    const auto& entries = canvas.mapping.entries;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            auto sgn = [](int v) { return (v > 0) - (v < 0); };
            REQUIRE(sgn(entries[i].source.row - entries[j].source.row) ==
                    sgn(entries[i].canvas.row - entries[j].canvas.row));
            REQUIRE(sgn(entries[i].source.col - entries[j].source.col) ==
                    sgn(entries[i].canvas.col - entries[j].canvas.col));
        }
    }

    // Content fidelity: every retained crop appears bit-exact exactly once.
    for (const auto& entry : entries) {
        const Image expected = padded_crop(grid, entry.source.row, entry.source.col);
        int matches = 0;
        for (int r = 0; r < canvas.rows; ++r) {
            for (int c = 0; c < canvas.cols; ++c) {
                if (canvas_cell(canvas, r, c) == expected) ++matches;
            }
        }
        REQUIRE(matches == 1);
    }

    // Holes and unfilled cells are solid black.
    for (int r = 0; r < canvas.rows; ++r) {
        for (int c = 0; c < canvas.cols; ++c) {
            if (canvas.filled_at(r, c)) continue;
            REQUIRE(canvas_cell(canvas, r, c) == Image::solid(canvas.cell_size,
                                                              canvas.cell_size, Rgb{0, 0, 0}));
        }
    }

    // Idempotence: compressing the compressed mask changes nothing.
    RetentionMask again = RetentionMask::zeros(compressed.rows, compressed.cols);
    again.bits = compressed.bits;
    const CompressedMask twice = compress_mask(again);
    REQUIRE(twice.rows == compressed.rows);
    REQUIRE(twice.cols == compressed.cols);
    REQUIRE(twice.bits == compressed.bits);
    for (int r = 0; r < twice.rows; ++r) REQUIRE(twice.kept_rows[static_cast<std::size_t>(r)] == r);
    for (int c = 0; c < twice.cols; ++c) REQUIRE(twice.kept_cols[static_cast<std::size_t>(c)] == c);

    // Cell-area reduction, equality only when nothing was removable.
    REQUIRE(compressed.rows * compressed.cols <= mask.rows * mask.cols);
    bool every_row_kept = static_cast<int>(compressed.kept_rows.size()) == mask.rows;
    bool every_col_kept = static_cast<int>(compressed.kept_cols.size()) == mask.cols;
    REQUIRE((compressed.rows * compressed.cols == mask.rows * mask.cols) ==
            (every_row_kept && every_col_kept));
}

} // namespace

TEST_CASE("compress_mask: single survivor") {
    const auto mask = mask_from_rows(3, {{0, 0, 0}, {0, 1, 0}, {0, 0, 0}});
    const CompressedMask m = compress_mask(mask);
    CHECK(m.kept_rows == std::vector<int>{1});
    CHECK(m.kept_cols == std::vector<int>{1});
    CHECK(m.rows == 1);
    CHECK(m.cols == 1);
    CHECK(m.at(0, 0));
}

TEST_CASE("compress_mask: four corners collapse to a full 2x2") {
    // Hand trace: rows {0, 2} and cols {0, 2} hold set bits; the middle row
    // and column vanish; every surviving intersection carries a bit.
    const auto mask = mask_from_rows(3, {{1, 0, 1}, {0, 0, 0}, {1, 0, 1}});
    const CompressedMask m = compress_mask(mask);
    CHECK(m.kept_rows == std::vector<int>{0, 2});
    CHECK(m.kept_cols == std::vector<int>{0, 2});
    CHECK(m.bits == std::vector<std::uint8_t>{1, 1, 1, 1});
}

TEST_CASE("compress_mask: all ones is the identity") {
    const RetentionMask mask = RetentionMask::full(3, 4);
    const CompressedMask m = compress_mask(mask);
    CHECK(m.rows == 3);
    CHECK(m.cols == 4);
    CHECK(m.kept_rows == std::vector<int>{0, 1, 2});
    CHECK(m.kept_cols == std::vector<int>{0, 1, 2, 3});
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) CHECK(m.at(r, c));
    }
}

TEST_CASE("compress_mask: empty mask is rejected") {
    CHECK_THROWS_AS(compress_mask(RetentionMask::zeros(2, 2)), InvalidInputError);
}

TEST_CASE("spatial_layout: full mask on a one-cell grid reproduces the source") {
    const Image source = cell_coded_image(1, 1, 16);
    const CropGrid grid = partition(source, 16);
    const Canvas canvas = spatial_layout(grid, RetentionMask::full(1, 1));
    CHECK(canvas.image == source);
    CHECK(canvas.rows == 1);
    CHECK(canvas.cols == 1);
}

TEST_CASE("spatial_layout: corner mask keeps the corner crops in place") {
    const CropGrid grid = partition(cell_coded_image(3, 3, 16), 16);
    const auto mask = mask_from_rows(3, {{1, 0, 1}, {0, 0, 0}, {1, 0, 1}});
    const Canvas canvas = spatial_layout(grid, mask);
    REQUIRE(canvas.rows == 2);
    REQUIRE(canvas.cols == 2);
    CHECK(canvas_cell(canvas, 0, 0) == padded_crop(grid, 0, 0));
    CHECK(canvas_cell(canvas, 0, 1) == padded_crop(grid, 0, 2));
    CHECK(canvas_cell(canvas, 1, 0) == padded_crop(grid, 2, 0));
    CHECK(canvas_cell(canvas, 1, 1) == padded_crop(grid, 2, 2));
}

TEST_CASE("spatial_layout: one full row becomes a strip in column order") {
    const CropGrid grid = partition(cell_coded_image(3, 4, 16), 16);
    const auto mask = mask_from_rows(4, {{0, 0, 0, 0}, {1, 1, 1, 1}, {0, 0, 0, 0}});
    const Canvas canvas = spatial_layout(grid, mask);
    REQUIRE(canvas.rows == 1);
    REQUIRE(canvas.cols == 4);
    for (int c = 0; c < 4; ++c) {
        CHECK(canvas_cell(canvas, 0, c) == padded_crop(grid, 1, c));
    }
}

TEST_CASE("spatial_layout: dimension mismatch is rejected") {
    const CropGrid grid = partition(cell_coded_image(2, 2, 16), 16);
    CHECK_THROWS_AS(spatial_layout(grid, RetentionMask::full(3, 2)), InvalidInputError);
}

TEST_CASE("spatial_layout: ragged crops are top-left aligned and padded black") {
    // 40x24 source at cell 16: right and bottom edge cells are ragged.
    Image source = Image::solid(40, 24, Rgb{200, 100, 50});
    const CropGrid grid = partition(source, 16);
    const Canvas canvas = spatial_layout(grid, RetentionMask::full(grid.rows(), grid.cols()));
    CHECK(canvas.image.width == grid.cols() * 16);
    CHECK(canvas.image.height == grid.rows() * 16);
    // Ragged corner cell: content occupies its top-left 8x8, rest black.
    const Image corner = canvas_cell(canvas, grid.rows() - 1, grid.cols() - 1);
    CHECK(corner.at(0, 0) == Rgb{200, 100, 50});
    CHECK(corner.at(7, 7) == Rgb{200, 100, 50});
    CHECK(corner.at(8, 0) == Rgb{0, 0, 0});
    CHECK(corner.at(0, 8) == Rgb{0, 0, 0});
}

TEST_CASE("strip_layout_by_score: a single crop matches spatial layout") {
    const CropGrid grid = partition(cell_coded_image(3, 3, 16), 16);
    const auto mask = mask_from_rows(3, {{0, 0, 0}, {0, 0, 1}, {0, 0, 0}});
    ScoreMatrix scores = ScoreMatrix::zeros(3, 3);
    const Canvas strip = strip_layout_by_score(grid, mask, scores, StripOrder::score_ascending);
    const Canvas spatial = spatial_layout(grid, mask);
    CHECK(strip.image == spatial.image);
}

TEST_CASE("strip_layout_by_score: score-ascending order") {
    const CropGrid grid = partition(cell_coded_image(2, 2, 16), 16);
    // Cells a=(0,0) 0.4, b=(0,1) 0.1, c=(1,0) 0.3, d=(1,1) 0.2.
    ScoreMatrix scores = ScoreMatrix::zeros(2, 2);
    scores.set(0, 0, 0.4);
    scores.set(0, 1, 0.1);
    scores.set(1, 0, 0.3);
    scores.set(1, 1, 0.2);
    const Canvas canvas = strip_layout_by_score(grid, RetentionMask::full(2, 2), scores,
                                                StripOrder::score_ascending);
    REQUIRE(canvas.rows == 2);
    REQUIRE(canvas.cols == 2);
    // Expected order b, d, c, a (ascending 0.1, 0.2, 0.3, 0.4).
    CHECK(canvas_cell(canvas, 0, 0) == padded_crop(grid, 0, 1));
    CHECK(canvas_cell(canvas, 0, 1) == padded_crop(grid, 1, 1));
    CHECK(canvas_cell(canvas, 1, 0) == padded_crop(grid, 1, 0));
    CHECK(canvas_cell(canvas, 1, 1) == padded_crop(grid, 0, 0));
}

TEST_CASE("strip_layout_by_score: appearance order ignores scores") {
    const CropGrid grid = partition(cell_coded_image(2, 2, 16), 16);
    ScoreMatrix scores = ScoreMatrix::zeros(2, 2);
    scores.set(0, 0, 0.9); // would sort last by score
    const Canvas canvas = strip_layout_by_score(grid, RetentionMask::full(2, 2), scores,
                                                StripOrder::appearance);
    CHECK(canvas_cell(canvas, 0, 0) == padded_crop(grid, 0, 0));
    CHECK(canvas_cell(canvas, 0, 1) == padded_crop(grid, 0, 1));
    CHECK(canvas_cell(canvas, 1, 0) == padded_crop(grid, 1, 0));
    CHECK(canvas_cell(canvas, 1, 1) == padded_crop(grid, 1, 1));
}

TEST_CASE("layout properties: exhaustive over all nonempty masks up to 3x3") {
    for (int rows = 1; rows <= 3; ++rows) {
        for (int cols = 1; cols <= 3; ++cols) {
            const CropGrid grid = partition(cell_coded_image(rows, cols, 16), 16);
            const int n = rows * cols;
            for (int bits = 1; bits < (1 << n); ++bits) {
                RetentionMask mask = RetentionMask::zeros(rows, cols);
                for (int cell = 0; cell < n; ++cell) {
                    if (bits & (1 << cell)) {
                        mask.bits[static_cast<std::size_t>(cell)] = 1;
                    }
                }
                check_layout_properties(grid, mask);
            }
        }
    }
}

TEST_CASE("layout properties: random masks on a 4x4 grid") {
    const CropGrid grid = partition(cell_coded_image(4, 4, 16), 16);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 64; ++trial) {
        const int bits = 1 + static_cast<int>(rng.next_below((1u << 16) - 1));
        RetentionMask mask = RetentionMask::zeros(4, 4);
        for (int cell = 0; cell < 16; ++cell) {
            if (bits & (1 << cell)) mask.bits[static_cast<std::size_t>(cell)] = 1;
        }
        check_layout_properties(grid, mask);
    }
}
