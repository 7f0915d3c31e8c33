#include "rap/grid.hpp"

#include <algorithm>
#include <utility>

#include "rap/error.hpp"

namespace rap {

PixelRect CropGrid::rect_at(int row, int col) const {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
        throw IndexError("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                         ") outside grid " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    const int x = col * cell_size_;
    const int y = row * cell_size_;
    return PixelRect{x, y, std::min(cell_size_, source_->width - x),
                     std::min(cell_size_, source_->height - y)};
}

Crop CropGrid::crop_at(int row, int col) const {
    const PixelRect rect = rect_at(row, col);
    Crop crop;
    crop.row = row;
    crop.col = col;
    crop.rect = rect;
    crop.pixels.width = rect.w;
    crop.pixels.height = rect.h;
    crop.pixels.pixels.resize(static_cast<std::size_t>(rect.w) * rect.h * 3);
    const Image& src = *source_;
    for (int y = 0; y < rect.h; ++y) {
        const std::size_t src_off =
            (static_cast<std::size_t>(rect.y + y) * src.width + rect.x) * 3;
        const std::size_t dst_off = static_cast<std::size_t>(y) * rect.w * 3;
        std::copy_n(src.pixels.begin() + static_cast<std::ptrdiff_t>(src_off),
                    static_cast<std::size_t>(rect.w) * 3,
                    crop.pixels.pixels.begin() + static_cast<std::ptrdiff_t>(dst_off));
    }
    return crop;
}

CropGrid partition(std::shared_ptr<const Image> image, int cell_size) {
    if (!image) {
        throw InvalidInputError("null image");
    }
    validate_image(*image);
    if (cell_size < kMinCellSize) {
        throw InvalidConfigError("cell_size must be at least " + std::to_string(kMinCellSize) +
                                 ", got " + std::to_string(cell_size));
    }
    CropGrid grid;
    grid.source_ = std::move(image);
    grid.cell_size_ = cell_size;
    grid.rows_ = (grid.source_->height + cell_size - 1) / cell_size;
    grid.cols_ = (grid.source_->width + cell_size - 1) / cell_size;
    return grid;
}

CropGrid partition(Image image, int cell_size) {
    return partition(std::make_shared<const Image>(std::move(image)), cell_size);
}

} // namespace rap
