#pragma once

#include <string>

#include "rap/providers.hpp"
#include "rap/synthetic.hpp"

namespace rap {

struct OracleOptions {
    /// Confidence level above which answer() commits to the answer key.
    double tau = 0.6;
    /// Reference canvas area in lattice cells; the area penalty halves the
    /// confidence exactly when the canvas covers this many cells.
    double reference_area_cells = 4.0;
    /// Extra embedding axes reserved for per-cell noise directions.
    int noise_dims = 8;
};

/// Deterministic synthetic backend. Embeddings and confidences are computed
/// from instance geometry alone (never from pixels), so results are exact,
/// fast, and identical across runs and platforms.
///
/// Embedding space: one basis axis per target, noise_dims trailing axes for
/// noise. A crop covering fraction a of a target embeds as
/// a*e_t + sqrt(1-a^2)*u with u a seeded unit direction orthogonal to every
/// target axis. Confidence is
///   vis * A_ref / (A_ref + A_canvas) * 2, clamped to [0, 1],
/// where vis is the visible fraction of the question's targets (minimum over
/// both targets for cross-instance questions, zeroed when the canvas flips
/// their original relative order) and A_canvas is the canvas pixel area.
class OracleProvider : public EmbeddingProvider, public ConfidenceProvider {
public:
    OracleProvider(SyntheticInstance instance, int cell_size, OracleOptions options = {});

    Embedding embed_query(const std::string& text) override;
    Embedding embed_image(const Crop& crop) override;
    double yes_probability(const Canvas& canvas, const std::string& query) override;
    std::string answer(const Canvas& canvas, const std::string& query) override;

    /// Basis direction assigned to a target id; unknown ids get a seeded
    /// hash direction in the noise subspace. Exposed for tests.
    Embedding target_direction(int target_id) const;

    const SyntheticInstance& instance() const { return instance_; }
    int cell_size() const { return cell_size_; }
    const OracleOptions& options() const { return options_; }

private:
    struct TargetView {
        double visible_fraction = 0.0;
        // Area-weighted centroids in source and canvas pixel coordinates.
        double source_x = 0.0, source_y = 0.0;
        double canvas_x = 0.0, canvas_y = 0.0;
        bool on_canvas = false;
    };

    int target_index(int target_id) const; // -1 when unknown
    double overlap_area(const TargetSpec& target, const PixelRect& rect) const;
    double target_area(const TargetSpec& target) const;
    Embedding noise_direction(std::uint64_t stream) const;
    Embedding axis(int index) const;
    TargetView view_of(const Canvas& canvas, const TargetSpec& target) const;
    double confidence(const Canvas& canvas, const std::string& query) const;

    SyntheticInstance instance_;
    int cell_size_ = 0;
    OracleOptions options_;
    int dim_ = 0;
};

} // namespace rap
