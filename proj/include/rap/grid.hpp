#pragma once

#include <memory>

#include "rap/image.hpp"

namespace rap {

/// Smallest crop edge the partitioner accepts.
inline constexpr int kMinCellSize = 16;

struct PixelRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }
    bool operator==(const PixelRect&) const = default;
};

/// Pixel-exact copy of one grid cell.
struct Crop {
    int row = 0;
    int col = 0;
    PixelRect rect;
    Image pixels;
};

/// A source image partitioned into a rows() x cols() lattice of cells.
/// Interior cells are cell_size x cell_size; right/bottom edge cells keep
/// their ragged remainder (no padding at partition time). Immutable after
/// construction, safe for concurrent reads.
class CropGrid {
public:
    CropGrid() = default;

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int cell_size() const { return cell_size_; }
    int cell_count() const { return rows_ * cols_; }

    const Image& source() const { return *source_; }
    std::shared_ptr<const Image> source_ptr() const { return source_; }

    /// Geometry of cell (row, col). Throws IndexError when out of range.
    PixelRect rect_at(int row, int col) const;

    /// Copies the cell's pixels into a fresh buffer.
    Crop crop_at(int row, int col) const;

    /// Row-major cell index helpers used by retrieval and search.
    int cell_index(int row, int col) const { return row * cols_ + col; }
    int index_row(int cell) const { return cell / cols_; }
    int index_col(int cell) const { return cell % cols_; }

private:
    friend CropGrid partition(std::shared_ptr<const Image> image, int cell_size);

    std::shared_ptr<const Image> source_;
    int cell_size_ = 0;
    int rows_ = 0;
    int cols_ = 0;
};

/// Splits the image into ceil(H/cell) x ceil(W/cell) cells.
/// Throws InvalidInputError on a degenerate image and InvalidConfigError
/// when cell_size < kMinCellSize.
CropGrid partition(std::shared_ptr<const Image> image, int cell_size);
CropGrid partition(Image image, int cell_size);

} // namespace rap
