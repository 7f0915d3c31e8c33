#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rap/image.hpp"
#include "rap/layout.hpp"

#include <json.hpp>

namespace rap {

enum class QuestionKind {
    single_instance,
    cross_instance_spatial,
};

std::string to_string(QuestionKind kind);
QuestionKind question_kind_from_string(const std::string& text);

/// One planted object: the grid cells it covers plus the attribute the
/// single-instance question asks about.
struct TargetSpec {
    int id = 0;
    std::vector<CellRef> cells;
    std::string attribute;
};

/// A self-contained task: a lattice of cells, planted targets, a question
/// and its expected answer. Resolution-independent; rasterize() materializes
/// it at a concrete cell size.
struct SyntheticInstance {
    std::string id;
    int grid_rows = 0;
    int grid_cols = 0;
    std::vector<TargetSpec> targets;
    std::string question;
    QuestionKind kind = QuestionKind::single_instance;
    std::string answer_key;
    std::uint64_t seed = 0;

    /// Throws InvalidInputError when target cells are out of bounds or a
    /// cross-instance question does not reference exactly two targets.
    void validate() const;
};

void to_json(nlohmann::json& j, const TargetSpec& t);
void from_json(const nlohmann::json& j, TargetSpec& t);
void to_json(nlohmann::json& j, const SyntheticInstance& inst);
void from_json(const nlohmann::json& j, SyntheticInstance& inst);

/// Solid-color rectangles on a dark background; each target's cells are
/// filled with its attribute color.
Image rasterize(const SyntheticInstance& instance, int cell_size);

/// Fixed palette used by the generator; unknown names fall back to a
/// hash-derived color so rasterization never fails.
Rgb color_for_attribute(const std::string& name);
const std::vector<std::string>& attribute_palette();

/// Target ids referenced by a question, in order of appearance
/// ("object <n>" occurrences).
std::vector<int> mentioned_target_ids(const std::string& question);

std::vector<SyntheticInstance> load_suite(const std::filesystem::path& path);
void save_suite(const std::vector<SyntheticInstance>& instances,
                const std::filesystem::path& path);

} // namespace rap
