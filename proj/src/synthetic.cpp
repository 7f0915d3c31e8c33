#include "rap/synthetic.hpp"

#include <cctype>
#include <fstream>

#include "rap/error.hpp"
#include "rap/rng.hpp"

namespace rap {

std::string to_string(QuestionKind kind) {
    switch (kind) {
    case QuestionKind::single_instance: return "single-instance";
    case QuestionKind::cross_instance_spatial: return "cross-instance-spatial";
    }
    return "single-instance";
}

QuestionKind question_kind_from_string(const std::string& text) {
    if (text == "single-instance") return QuestionKind::single_instance;
    if (text == "cross-instance-spatial") return QuestionKind::cross_instance_spatial;
    throw InvalidInputError("unknown question kind: " + text);
}

void SyntheticInstance::validate() const {
    if (grid_rows < 1 || grid_cols < 1) {
        throw InvalidInputError("instance grid has a zero dimension");
    }
    if (targets.empty()) {
        throw InvalidInputError("instance has no targets");
    }
    for (const auto& t : targets) {
        if (t.cells.empty()) {
            throw InvalidInputError("target " + std::to_string(t.id) + " covers no cells");
        }
        for (const auto& cell : t.cells) {
            if (cell.row < 0 || cell.row >= grid_rows || cell.col < 0 || cell.col >= grid_cols) {
                throw InvalidInputError("target " + std::to_string(t.id) +
                                        " cell outside grid bounds");
            }
        }
    }
    if (kind == QuestionKind::cross_instance_spatial &&
        mentioned_target_ids(question).size() != 2) {
        throw InvalidInputError("cross-instance question must reference exactly two targets");
    }
}

void to_json(nlohmann::json& j, const TargetSpec& t) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : t.cells) {
        cells.push_back({{"row", c.row}, {"col", c.col}});
    }
    j = {{"id", t.id}, {"cells", cells}, {"attribute", t.attribute}};
}

void from_json(const nlohmann::json& j, TargetSpec& t) {
    t.id = j.at("id").get<int>();
    t.attribute = j.at("attribute").get<std::string>();
    t.cells.clear();
    for (const auto& c : j.at("cells")) {
        t.cells.push_back({c.at("row").get<int>(), c.at("col").get<int>()});
    }
}

void to_json(nlohmann::json& j, const SyntheticInstance& inst) {
    j = {{"id", inst.id},
         {"grid_rows", inst.grid_rows},
         {"grid_cols", inst.grid_cols},
         {"targets", inst.targets},
         {"question", inst.question},
         {"question_kind", to_string(inst.kind)},
         {"answer_key", inst.answer_key},
         {"seed", inst.seed}};
}

void from_json(const nlohmann::json& j, SyntheticInstance& inst) {
    inst.id = j.at("id").get<std::string>();
    inst.grid_rows = j.at("grid_rows").get<int>();
    inst.grid_cols = j.at("grid_cols").get<int>();
    inst.targets = j.at("targets").get<std::vector<TargetSpec>>();
    inst.question = j.at("question").get<std::string>();
    inst.kind = question_kind_from_string(j.at("question_kind").get<std::string>());
    inst.answer_key = j.at("answer_key").get<std::string>();
    inst.seed = j.at("seed").get<std::uint64_t>();
}

namespace {

const std::vector<std::pair<std::string, Rgb>>& palette_table() {
    static const std::vector<std::pair<std::string, Rgb>> table = {
        {"red", {220, 50, 47}},     {"orange", {203, 120, 20}}, {"yellow", {230, 200, 30}},
        {"green", {60, 160, 60}},   {"cyan", {42, 180, 190}},   {"blue", {50, 90, 210}},
        {"purple", {130, 70, 180}}, {"magenta", {200, 60, 150}}, {"brown", {130, 90, 50}},
        {"white", {240, 240, 240}},
    };
    return table;
}

constexpr Rgb kBackground{36, 36, 36};

} // namespace

const std::vector<std::string>& attribute_palette() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, rgb] : palette_table()) out.push_back(name);
        return out;
    }();
    return names;
}

Rgb color_for_attribute(const std::string& name) {
    for (const auto& [key, rgb] : palette_table()) {
        if (key == name) return rgb;
    }
    const std::uint64_t h = fnv1a64(name);
    return Rgb{static_cast<std::uint8_t>(64 + (h & 0x7f)),
               static_cast<std::uint8_t>(64 + ((h >> 8) & 0x7f)),
               static_cast<std::uint8_t>(64 + ((h >> 16) & 0x7f))};
}

Image rasterize(const SyntheticInstance& instance, int cell_size) {
    instance.validate();
    if (cell_size < 1) {
        throw InvalidInputError("cell size must be positive");
    }
    Image image = Image::solid(instance.grid_cols * cell_size,
                               instance.grid_rows * cell_size, kBackground);
    for (const auto& target : instance.targets) {
        const Rgb color = color_for_attribute(target.attribute);
        for (const auto& cell : target.cells) {
            image.fill_rect(cell.col * cell_size, cell.row * cell_size, cell_size, cell_size,
                            color);
        }
    }
    return image;
}

std::vector<int> mentioned_target_ids(const std::string& question) {
    std::vector<int> ids;
    const std::string marker = "object ";
    std::size_t pos = 0;
    while ((pos = question.find(marker, pos)) != std::string::npos) {
        std::size_t digit = pos + marker.size();
        if (digit < question.size() && std::isdigit(static_cast<unsigned char>(question[digit]))) {
            int value = 0;
            while (digit < question.size() &&
                   std::isdigit(static_cast<unsigned char>(question[digit]))) {
                value = value * 10 + (question[digit] - '0');
                ++digit;
            }
            ids.push_back(value);
            pos = digit;
        } else {
            pos += marker.size();
        }
    }
    return ids;
}

std::vector<SyntheticInstance> load_suite(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open suite: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse suite " + path.string() + ": " + e.what());
    }
    std::vector<SyntheticInstance> instances;
    try {
        instances = doc.at("instances").get<std::vector<SyntheticInstance>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("suite document malformed: " + std::string(e.what()));
    }
    for (const auto& inst : instances) inst.validate();
    return instances;
}

void save_suite(const std::vector<SyntheticInstance>& instances,
                const std::filesystem::path& path) {
    nlohmann::json doc = {{"instances", instances}};
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write suite: " + path.string());
    }
    out << doc.dump(2) << "\n";
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

} // namespace rap
