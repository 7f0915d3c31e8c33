#pragma once

#include <optional>
#include <vector>

#include "rap/grid.hpp"
#include "rap/retrieval.hpp"

namespace rap {

struct CellRef {
    int row = 0;
    int col = 0;

    auto operator<=>(const CellRef&) const = default;
};

/// Retention mask with all-zero rows and columns removed.
/// kept_rows / kept_cols are the surviving source indices, strictly
/// increasing; bits is the N_r x N_c sub-matrix. Every row and every column
/// of bits carries at least one set bit.
struct CompressedMask {
    std::vector<int> kept_rows;
    std::vector<int> kept_cols;
    int rows = 0; // N_r
    int cols = 0; // N_c
    std::vector<std::uint8_t> bits;

    bool at(int row, int col) const {
        return bits[static_cast<std::size_t>(row) * cols + col] != 0;
    }
};

/// Where each filled canvas cell came from. Injective by construction.
struct LayoutMapping {
    struct Entry {
        CellRef canvas;
        CellRef source;
    };
    std::vector<Entry> entries;

    std::optional<CellRef> source_of(CellRef canvas_cell) const;
    std::optional<CellRef> canvas_of(CellRef source_cell) const;
};

/// A composed image: rows x cols cells of cell_size pixels each. Unfilled
/// cells (and ragged-crop padding) are solid black.
struct Canvas {
    Image image;
    int cell_size = 0;
    int rows = 0;
    int cols = 0;
    LayoutMapping mapping;
    std::vector<std::uint8_t> filled; // rows x cols

    bool filled_at(int row, int col) const {
        return filled[static_cast<std::size_t>(row) * cols + col] != 0;
    }
    int cell_count() const { return rows * cols; }
    std::int64_t pixel_area() const { return image.pixel_area(); }
};

/// Removes all-zero rows/columns of the mask and records the index sets.
/// Throws InvalidInputError on an empty mask.
CompressedMask compress_mask(const RetentionMask& mask);

/// Position-preserving composition: canvas cell (i~, j~) shows source cell
/// (kept_rows[i~], kept_cols[j~]) when its bit survives, black otherwise.
/// Ragged edge crops are placed top-left-aligned and padded with black.
Canvas spatial_layout(const CropGrid& grid, const RetentionMask& mask);

enum class StripOrder {
    score_ascending, // most relevant crop first
    appearance,      // original row-major order
};

/// Position-discarding baseline: retained crops concatenated left-to-right,
/// wrapping into ceil(sqrt(k)) columns.
Canvas strip_layout_by_score(const CropGrid& grid, const RetentionMask& mask,
                             const ScoreMatrix& scores, StripOrder order);

} // namespace rap
