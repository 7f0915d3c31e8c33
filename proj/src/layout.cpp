#include "rap/layout.hpp"

#include <algorithm>
#include <cmath>

#include "rap/error.hpp"

namespace rap {

namespace {

/// Copies a crop into canvas cell (row, col), top-left aligned. The canvas
/// starts out black, so ragged crops are implicitly padded.
void blit_cell(Image& canvas, int cell_size, int row, int col, const Image& crop) {
    for (int y = 0; y < crop.height; ++y) {
        const std::size_t dst_off =
            (static_cast<std::size_t>(row * cell_size + y) * canvas.width +
             static_cast<std::size_t>(col) * cell_size) *
            3;
        const std::size_t src_off = static_cast<std::size_t>(y) * crop.width * 3;
        std::copy_n(crop.pixels.begin() + static_cast<std::ptrdiff_t>(src_off),
                    static_cast<std::size_t>(crop.width) * 3,
                    canvas.pixels.begin() + static_cast<std::ptrdiff_t>(dst_off));
    }
}

Canvas blank_canvas(int rows, int cols, int cell_size) {
    Canvas canvas;
    canvas.cell_size = cell_size;
    canvas.rows = rows;
    canvas.cols = cols;
    canvas.image = Image::solid(cols * cell_size, rows * cell_size, Rgb{0, 0, 0});
    canvas.filled.assign(static_cast<std::size_t>(rows) * cols, 0);
    return canvas;
}

void require_mask_matches(const CropGrid& grid, const RetentionMask& mask) {
    if (mask.rows != grid.rows() || mask.cols != grid.cols()) {
        throw InvalidInputError("mask dimensions do not match grid");
    }
    if (mask.count() < 1) {
        throw InvalidInputError("empty retention mask");
    }
}

} // namespace

std::optional<CellRef> LayoutMapping::source_of(CellRef canvas_cell) const {
    for (const auto& e : entries) {
        if (e.canvas == canvas_cell) return e.source;
    }
    return std::nullopt;
}

std::optional<CellRef> LayoutMapping::canvas_of(CellRef source_cell) const {
    for (const auto& e : entries) {
        if (e.source == source_cell) return e.canvas;
    }
    return std::nullopt;
}

CompressedMask compress_mask(const RetentionMask& mask) {
    if (mask.rows < 1 || mask.cols < 1) {
        throw InvalidInputError("degenerate mask");
    }
    if (mask.count() < 1) {
        throw InvalidInputError("empty retention mask");
    }
    CompressedMask out;
    for (int r = 0; r < mask.rows; ++r) {
        for (int c = 0; c < mask.cols; ++c) {
            if (mask.at(r, c)) {
                out.kept_rows.push_back(r);
                break;
            }
        }
    }
    for (int c = 0; c < mask.cols; ++c) {
        for (int r = 0; r < mask.rows; ++r) {
            if (mask.at(r, c)) {
                out.kept_cols.push_back(c);
                break;
            }
        }
    }
    out.rows = static_cast<int>(out.kept_rows.size());
    out.cols = static_cast<int>(out.kept_cols.size());
    out.bits.assign(static_cast<std::size_t>(out.rows) * out.cols, 0);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            out.bits[static_cast<std::size_t>(r) * out.cols + c] =
                mask.at(out.kept_rows[static_cast<std::size_t>(r)],
                        out.kept_cols[static_cast<std::size_t>(c)])
                    ? 1
                    : 0;
        }
    }
    return out;
}

Canvas spatial_layout(const CropGrid& grid, const RetentionMask& mask) {
    require_mask_matches(grid, mask);
    const CompressedMask compressed = compress_mask(mask);

    Canvas canvas = blank_canvas(compressed.rows, compressed.cols, grid.cell_size());
    for (int r = 0; r < compressed.rows; ++r) {
        for (int c = 0; c < compressed.cols; ++c) {
            if (!compressed.at(r, c)) continue;
            const int src_row = compressed.kept_rows[static_cast<std::size_t>(r)];
            const int src_col = compressed.kept_cols[static_cast<std::size_t>(c)];
            blit_cell(canvas.image, canvas.cell_size, r, c, grid.crop_at(src_row, src_col).pixels);
            canvas.filled[static_cast<std::size_t>(r) * canvas.cols + c] = 1;
            canvas.mapping.entries.push_back({CellRef{r, c}, CellRef{src_row, src_col}});
        }
    }
    return canvas;
}

Canvas strip_layout_by_score(const CropGrid& grid, const RetentionMask& mask,
                             const ScoreMatrix& scores, StripOrder order) {
    require_mask_matches(grid, mask);
    if (scores.rows != mask.rows || scores.cols != mask.cols) {
        throw InvalidInputError("score matrix dimensions do not match mask");
    }

    std::vector<int> cells = mask.set_cells(); // row-major = appearance order
    if (order == StripOrder::score_ascending) {
        std::stable_sort(cells.begin(), cells.end(), [&](int a, int b) {
            return scores.at_index(a) < scores.at_index(b);
        });
    }

    const int k = static_cast<int>(cells.size());
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
    const int rows = (k + cols - 1) / cols;

    Canvas canvas = blank_canvas(rows, cols, grid.cell_size());
    for (int i = 0; i < k; ++i) {
        const int r = i / cols;
        const int c = i % cols;
        const int cell = cells[static_cast<std::size_t>(i)];
        const int src_row = cell / grid.cols();
        const int src_col = cell % grid.cols();
        blit_cell(canvas.image, canvas.cell_size, r, c, grid.crop_at(src_row, src_col).pixels);
        canvas.filled[static_cast<std::size_t>(r) * cols + c] = 1;
        canvas.mapping.entries.push_back({CellRef{r, c}, CellRef{src_row, src_col}});
    }
    return canvas;
}

} // namespace rap
