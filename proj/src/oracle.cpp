#include "rap/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "rap/error.hpp"
#include "rap/rng.hpp"

namespace rap {

namespace {

double overlap_1d(int a0, int a1, int b0, int b1) {
    return std::max(0, std::min(a1, b1) - std::max(a0, b0));
}

double rect_overlap(const PixelRect& a, const PixelRect& b) {
    return overlap_1d(a.x, a.x + a.w, b.x, b.x + b.w) *
           overlap_1d(a.y, a.y + a.h, b.y, b.y + b.h);
}

int sign_of(double v) {
    if (v > 1e-9) return 1;
    if (v < -1e-9) return -1;
    return 0;
}

} // namespace

OracleProvider::OracleProvider(SyntheticInstance instance, int cell_size, OracleOptions options)
    : instance_(std::move(instance)), cell_size_(cell_size), options_(options) {
    instance_.validate();
    if (cell_size_ < 1) {
        throw InvalidConfigError("oracle cell size must be positive");
    }
    if (!(options_.tau > 0.0 && options_.tau < 1.0)) {
        throw InvalidConfigError("tau must be in (0, 1)");
    }
    if (options_.reference_area_cells <= 0.0) {
        throw InvalidConfigError("reference area must be positive");
    }
    if (options_.noise_dims < 1) {
        throw InvalidConfigError("noise_dims must be at least 1");
    }
    dim_ = static_cast<int>(instance_.targets.size()) + options_.noise_dims;
}

int OracleProvider::target_index(int target_id) const {
    for (std::size_t i = 0; i < instance_.targets.size(); ++i) {
        if (instance_.targets[i].id == target_id) return static_cast<int>(i);
    }
    return -1;
}

Embedding OracleProvider::axis(int index) const {
    Embedding e(static_cast<std::size_t>(dim_), 0.0);
    e[static_cast<std::size_t>(index)] = 1.0;
    return e;
}

Embedding OracleProvider::noise_direction(std::uint64_t stream) const {
    const int first = static_cast<int>(instance_.targets.size());
    SplitMix64 rng(stream);
    Embedding e(static_cast<std::size_t>(dim_), 0.0);
    double norm_sq = 0.0;
    for (int i = first; i < dim_; ++i) {
        const double v = rng.next_signed_unit();
        e[static_cast<std::size_t>(i)] = v;
        norm_sq += v * v;
    }
    if (norm_sq == 0.0) {
        e[static_cast<std::size_t>(first)] = 1.0;
        return e;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int i = first; i < dim_; ++i) {
        e[static_cast<std::size_t>(i)] *= inv;
    }
    return e;
}

Embedding OracleProvider::target_direction(int target_id) const {
    const int index = target_index(target_id);
    if (index < 0) {
        throw InvalidInputError("unknown target id " + std::to_string(target_id));
    }
    return axis(index);
}

Embedding OracleProvider::embed_query(const std::string& text) {
    if (text.empty()) {
        throw InvalidInputError("empty query text");
    }
    std::vector<int> indices;
    for (int id : mentioned_target_ids(text)) {
        const int index = target_index(id);
        if (index >= 0) indices.push_back(index);
    }
    if (indices.empty()) {
        return noise_direction(mix_seed(instance_.seed, fnv1a64(text)));
    }
    if (indices.size() == 1) {
        return axis(indices.front());
    }
    // Multi-target question: equal blend of the referenced directions.
    Embedding e(static_cast<std::size_t>(dim_), 0.0);
    for (int index : indices) {
        e[static_cast<std::size_t>(index)] = 1.0;
    }
    const double inv = 1.0 / std::sqrt(static_cast<double>(indices.size()));
    for (auto& v : e) v *= inv;
    return e;
}

double OracleProvider::overlap_area(const TargetSpec& target, const PixelRect& rect) const {
    double area = 0.0;
    for (const auto& cell : target.cells) {
        const PixelRect cell_rect{cell.col * cell_size_, cell.row * cell_size_, cell_size_,
                                  cell_size_};
        area += rect_overlap(rect, cell_rect);
    }
    return area;
}

double OracleProvider::target_area(const TargetSpec& target) const {
    return static_cast<double>(target.cells.size()) * cell_size_ * cell_size_;
}

Embedding OracleProvider::embed_image(const Crop& crop) {
    if (crop.rect.w < 1 || crop.rect.h < 1) {
        throw InvalidInputError("empty crop");
    }
    int best_target = -1;
    double best_alpha = 0.0;
    for (std::size_t i = 0; i < instance_.targets.size(); ++i) {
        const double alpha =
            overlap_area(instance_.targets[i], crop.rect) / static_cast<double>(crop.rect.area());
        if (alpha > best_alpha) {
            best_alpha = alpha;
            best_target = static_cast<int>(i);
        }
    }
    const Embedding noise = noise_direction(
        mix_seed(mix_seed(instance_.seed, static_cast<std::uint64_t>(crop.row)),
                 static_cast<std::uint64_t>(crop.col)));
    if (best_target < 0 || best_alpha <= 0.0) {
        return noise;
    }
    const double alpha = std::min(1.0, best_alpha);
    const double beta = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
    Embedding e = noise;
    for (auto& v : e) v *= beta;
    e[static_cast<std::size_t>(best_target)] += alpha;
    return e;
}

OracleProvider::TargetView OracleProvider::view_of(const Canvas& canvas,
                                                   const TargetSpec& target) const {
    TargetView view;
    const double total = target_area(target);

    double src_wx = 0.0, src_wy = 0.0;
    for (const auto& cell : target.cells) {
        const double area = static_cast<double>(cell_size_) * cell_size_;
        src_wx += (cell.col * cell_size_ + cell_size_ * 0.5) * area;
        src_wy += (cell.row * cell_size_ + cell_size_ * 0.5) * area;
    }
    view.source_x = src_wx / total;
    view.source_y = src_wy / total;

    const int ccs = canvas.cell_size;
    double visible = 0.0;
    double cv_wx = 0.0, cv_wy = 0.0;
    for (const auto& entry : canvas.mapping.entries) {
        const PixelRect source_rect{entry.source.col * ccs, entry.source.row * ccs, ccs, ccs};
        for (const auto& cell : target.cells) {
            const PixelRect cell_rect{cell.col * cell_size_, cell.row * cell_size_, cell_size_,
                                      cell_size_};
            const int x0 = std::max(source_rect.x, cell_rect.x);
            const int y0 = std::max(source_rect.y, cell_rect.y);
            const int x1 = std::min(source_rect.x + source_rect.w, cell_rect.x + cell_rect.w);
            const int y1 = std::min(source_rect.y + source_rect.h, cell_rect.y + cell_rect.h);
            if (x0 >= x1 || y0 >= y1) continue;
            const double area = static_cast<double>(x1 - x0) * (y1 - y0);
            visible += area;
            // Overlap centroid, translated into canvas coordinates.
            const double local_x = (x0 + x1) * 0.5 - source_rect.x;
            const double local_y = (y0 + y1) * 0.5 - source_rect.y;
            cv_wx += (entry.canvas.col * ccs + local_x) * area;
            cv_wy += (entry.canvas.row * ccs + local_y) * area;
        }
    }
    view.visible_fraction = std::clamp(visible / total, 0.0, 1.0);
    view.on_canvas = visible > 0.0;
    if (view.on_canvas) {
        view.canvas_x = cv_wx / visible;
        view.canvas_y = cv_wy / visible;
    }
    return view;
}

double OracleProvider::confidence(const Canvas& canvas, const std::string& query) const {
    if (query.empty()) {
        throw InvalidInputError("empty query");
    }
    if (canvas.image.empty() || canvas.cell_size < 1) {
        throw InvalidInputError("canvas not composed");
    }

    std::vector<int> indices;
    for (int id : mentioned_target_ids(query)) {
        const int index = target_index(id);
        if (index >= 0) indices.push_back(index);
    }
    if (indices.empty()) {
        return 0.0;
    }

    double vis = 0.0;
    if (indices.size() == 1) {
        vis = view_of(canvas, instance_.targets[static_cast<std::size_t>(indices[0])])
                  .visible_fraction;
    } else {
        const TargetView a = view_of(canvas, instance_.targets[static_cast<std::size_t>(indices[0])]);
        const TargetView b = view_of(canvas, instance_.targets[static_cast<std::size_t>(indices[1])]);
        vis = std::min(a.visible_fraction, b.visible_fraction);
        if (a.on_canvas && b.on_canvas) {
            const bool order_kept =
                sign_of(b.source_x - a.source_x) == sign_of(b.canvas_x - a.canvas_x) &&
                sign_of(b.source_y - a.source_y) == sign_of(b.canvas_y - a.canvas_y);
            if (!order_kept) vis = 0.0;
        }
    }

    const double a_ref = options_.reference_area_cells *
                         static_cast<double>(cell_size_) * cell_size_;
    const double a_canvas = static_cast<double>(canvas.pixel_area());
    const double conf = vis * (a_ref / (a_ref + a_canvas)) * 2.0;
    return std::clamp(conf, 0.0, 1.0);
}

double OracleProvider::yes_probability(const Canvas& canvas, const std::string& query) {
    return confidence(canvas, query);
}

std::string OracleProvider::answer(const Canvas& canvas, const std::string& query) {
    if (confidence(canvas, query) > options_.tau) {
        return instance_.answer_key;
    }
    return kUnanswerable;
}

} // namespace rap
