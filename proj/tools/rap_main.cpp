#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rap/error.hpp"
#include "rap/harness.hpp"
#include "rap/http_client.hpp"
#include "rap/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitUsage = 2;

struct ProviderBundle {
    std::unique_ptr<rap::OracleProvider> oracle;
    std::unique_ptr<rap::HttpModelProvider> http;

    rap::EmbeddingProvider& embedder() {
        if (oracle) return *oracle;
        return *http;
    }
    rap::ConfidenceProvider& model() {
        if (oracle) return *oracle;
        return *http;
    }
};

struct ProviderFlags {
    std::string provider = "oracle";
    std::string instance_path;
    rap::ProviderConfig http;
    rap::OracleOptions oracle;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--provider", provider, "Model backend: oracle or http")
            ->check(CLI::IsMember({"oracle", "http"}));
        cmd->add_option("--instance", instance_path,
                        "Synthetic instance JSON (required for the oracle backend)");
        cmd->add_option("--base-url", http.base_url,
                        "Backend endpoint, http://host:port or fixture://session.json");
        cmd->add_option("--timeout-ms", http.timeout_ms, "Request timeout");
        cmd->add_option("--max-retries", http.max_retries, "Retry count for transient failures");
        cmd->add_option("--auth-token-env", http.auth_token_env,
                        "Environment variable holding the bearer token");
        cmd->add_option("--max-in-flight", http.max_in_flight, "Concurrent embedding requests");
        cmd->add_option("--tau", oracle.tau, "Oracle answer-confidence threshold");
        cmd->add_option("--reference-area-cells", oracle.reference_area_cells,
                        "Oracle confidence reference area, in cells");
    }

    ProviderBundle build(int cell_size,
                         std::optional<rap::SyntheticInstance>* instance_out = nullptr) const {
        ProviderBundle bundle;
        if (provider == "oracle") {
            if (instance_path.empty()) {
                throw rap::InvalidConfigError("the oracle backend needs --instance");
            }
            std::ifstream in(instance_path);
            if (!in) {
                throw rap::IoError("cannot open instance: " + instance_path);
            }
            nlohmann::json doc;
            in >> doc;
            auto instance = doc.get<rap::SyntheticInstance>();
            if (instance_out) *instance_out = instance;
            bundle.oracle = std::make_unique<rap::OracleProvider>(std::move(instance), cell_size,
                                                                  oracle);
        } else {
            bundle.http = std::make_unique<rap::HttpModelProvider>(http);
        }
        return bundle;
    }
};

struct SearchFlags {
    rap::SearchParams params;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--ratios", params.retention_ratios,
                        "Retention ratios, strictly increasing, each in (0,1)")
            ->delimiter(',');
        cmd->add_option("--bias", params.bias, "Depth-weight floor");
        cmd->add_option("--threshold", params.threshold, "Terminating confidence");
        cmd->add_option("--max-depth", params.max_depth, "Deepest tree level");
        cmd->add_option("--max-expansions", params.max_expansions, "Expansion budget");
    }
};

std::shared_ptr<const rap::Image> load_source(const std::string& image_path,
                                              const std::optional<rap::SyntheticInstance>& instance,
                                              int cell_size) {
    if (!image_path.empty()) {
        return std::make_shared<const rap::Image>(rap::load_image(image_path));
    }
    if (instance) {
        return std::make_shared<const rap::Image>(rap::rasterize(*instance, cell_size));
    }
    throw rap::InvalidConfigError("provide --image, or --instance to rasterize one");
}

rap::TraceSink file_trace_sink(std::ofstream& out) {
    return [&out](const rap::TraceEntry& entry) {
        nlohmann::json j = {{"node", entry.node_id}, {"parent", entry.parent_id},
                            {"cells", entry.cells}, {"g", entry.g},
                            {"h", entry.h},         {"f", entry.f},
                            {"d", entry.depth}};
        out << j.dump() << "\n";
    };
}

int cmd_tile(const std::string& image_path, int cell_size, const std::string& out_path) {
    const auto image = std::make_shared<const rap::Image>(rap::load_image(image_path));
    const rap::CropGrid grid = rap::partition(image, cell_size);
    std::printf("%dx%d source, cell %d -> %dx%d grid, %d crops\n", image->width, image->height,
                cell_size, grid.rows(), grid.cols(), grid.cell_count());
    if (!out_path.empty()) {
        nlohmann::json crops = nlohmann::json::array();
        for (int r = 0; r < grid.rows(); ++r) {
            for (int c = 0; c < grid.cols(); ++c) {
                const auto rect = grid.rect_at(r, c);
                crops.push_back({{"row", r}, {"col", c}, {"x", rect.x}, {"y", rect.y},
                                 {"w", rect.w}, {"h", rect.h}});
            }
        }
        nlohmann::json doc = {{"width", image->width}, {"height", image->height},
                              {"cell_size", cell_size}, {"rows", grid.rows()},
                              {"cols", grid.cols()}, {"crops", crops}};
        std::ofstream out(out_path);
        if (!out) throw rap::IoError("cannot write " + out_path);
        out << doc.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_score(const std::string& image_path, const std::string& query, int cell_size,
              const ProviderFlags& provider_flags, const std::string& out_path) {
    std::optional<rap::SyntheticInstance> instance;
    ProviderBundle providers = provider_flags.build(cell_size, &instance);
    const auto image = load_source(image_path, instance, cell_size);
    const rap::CropGrid grid = rap::partition(image, cell_size);
    const std::string question =
        !query.empty() ? query : (instance ? instance->question : std::string());
    if (question.empty()) {
        throw rap::InvalidConfigError("provide --query (or --instance with a question)");
    }
    const rap::ScoreMatrix scores = rap::score_crops(question, grid, providers.embedder());

    double lo = 1.0, hi = 0.0;
    for (double v : scores.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::printf("scored %dx%d crops, min %.6f max %.6f\n", scores.rows, scores.cols, lo, hi);
    if (!out_path.empty()) {
        nlohmann::json matrix = nlohmann::json::array();
        for (int r = 0; r < scores.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < scores.cols; ++c) row.push_back(scores.at(r, c));
            matrix.push_back(row);
        }
        nlohmann::json doc = {{"rows", scores.rows}, {"cols", scores.cols}, {"scores", matrix}};
        std::ofstream out(out_path);
        if (!out) throw rap::IoError("cannot write " + out_path);
        out << doc.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_layout(const std::string& image_path, const std::string& query, int cell_size, int k,
               const std::string& strategy, const ProviderFlags& provider_flags,
               const std::string& out_path) {
    std::optional<rap::SyntheticInstance> instance;
    ProviderBundle providers = provider_flags.build(cell_size, &instance);
    const auto image = load_source(image_path, instance, cell_size);
    const rap::CropGrid grid = rap::partition(image, cell_size);
    const std::string question =
        !query.empty() ? query : (instance ? instance->question : std::string());
    if (question.empty()) {
        throw rap::InvalidConfigError("provide --query (or --instance with a question)");
    }
    const rap::ScoreMatrix scores = rap::score_crops(question, grid, providers.embedder());
    const rap::RetentionMask mask = rap::top_k(scores, k);

    rap::Canvas canvas;
    if (strategy == "spatial") {
        canvas = rap::spatial_layout(grid, mask);
    } else if (strategy == "score-ascending") {
        canvas = rap::strip_layout_by_score(grid, mask, scores, rap::StripOrder::score_ascending);
    } else {
        canvas = rap::strip_layout_by_score(grid, mask, scores, rap::StripOrder::appearance);
    }
    rap::save_png(canvas.image, out_path);
    std::printf("composed %dx%d-cell canvas (%dx%d px) -> %s\n", canvas.rows, canvas.cols,
                canvas.image.width, canvas.image.height, out_path.c_str());
    return kExitOk;
}

int cmd_search(const std::string& image_path, const std::string& query, int cell_size,
               const ProviderFlags& provider_flags, const SearchFlags& search_flags,
               const std::string& trace_path, const std::string& canvas_path) {
    std::optional<rap::SyntheticInstance> instance;
    ProviderBundle providers = provider_flags.build(cell_size, &instance);
    const auto image = load_source(image_path, instance, cell_size);
    const std::string question =
        !query.empty() ? query : (instance ? instance->question : std::string());
    if (question.empty()) {
        throw rap::InvalidConfigError("provide --query (or --instance with a question)");
    }

    std::ofstream trace_out;
    rap::TraceSink sink;
    if (!trace_path.empty()) {
        trace_out.open(trace_path, std::ios::binary);
        if (!trace_out) throw rap::IoError("cannot write trace: " + trace_path);
        sink = file_trace_sink(trace_out);
    }

    const rap::CropGrid grid = rap::partition(image, cell_size);
    const rap::ScoreMatrix scores = rap::score_crops(question, grid, providers.embedder());
    const rap::SearchOutcome outcome =
        rap::re_search(grid, scores, providers.model(), question, search_flags.params, sink);
    const std::string answer = providers.model().answer(outcome.final_canvas, question);

    if (!canvas_path.empty()) {
        rap::save_png(outcome.final_canvas.image, canvas_path);
    }
    std::printf("answer: %s\n", answer.c_str());
    std::printf("selected_k: %d\n", outcome.selected_k);
    std::printf("confidence: %.6f\n", outcome.confidence);
    std::printf("termination: %s\n", rap::to_string(outcome.termination));
    std::printf("expansions: %d\n", outcome.expansions);
    return kExitOk;
}

bool parse_grid_spec(const std::string& spec, int& rows, int& cols) {
    const auto x = spec.find('x');
    if (x == std::string::npos) return false;
    try {
        rows = std::stoi(spec.substr(0, x));
        cols = std::stoi(spec.substr(x + 1));
    } catch (...) {
        return false;
    }
    return rows > 0 && cols > 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retrieval-augmented perception for very large images"};
    app.require_subcommand(1);

    // tile
    auto* tile = app.add_subcommand("tile", "Partition an image into a crop grid");
    std::string tile_image, tile_out;
    int tile_cell = 448;
    tile->add_option("--image", tile_image, "Source image (PNG/JPEG/.raw)")->required();
    tile->add_option("--cell-size", tile_cell, "Crop edge in pixels");
    tile->add_option("--out", tile_out, "Write grid geometry JSON here");

    // score
    auto* score = app.add_subcommand("score", "Score crops against a query");
    std::string score_image, score_query, score_out;
    int score_cell = 448;
    ProviderFlags score_provider;
    score->add_option("--image", score_image, "Source image");
    score->add_option("--query", score_query, "Query text");
    score->add_option("--cell-size", score_cell, "Crop edge in pixels");
    score->add_option("--out", score_out, "Write the score matrix JSON here");
    score_provider.add_to(score);

    // layout
    auto* layout = app.add_subcommand("layout", "Compose the top-k crops into a canvas");
    std::string layout_image, layout_query, layout_out = "canvas.png";
    std::string layout_strategy = "spatial";
    int layout_cell = 448, layout_k = 8;
    ProviderFlags layout_provider;
    layout->add_option("--image", layout_image, "Source image");
    layout->add_option("--query", layout_query, "Query text");
    layout->add_option("--cell-size", layout_cell, "Crop edge in pixels");
    layout->add_option("--k", layout_k, "Number of crops to keep");
    layout->add_option("--strategy", layout_strategy, "spatial | score-ascending | appearance")
        ->check(CLI::IsMember({"spatial", "score-ascending", "appearance"}));
    layout->add_option("--out", layout_out, "Canvas PNG path");
    layout_provider.add_to(layout);

    // search
    auto* search = app.add_subcommand("search", "Adaptive-k search on one image");
    std::string search_image, search_query, search_trace, search_canvas;
    int search_cell = 448;
    ProviderFlags search_provider;
    SearchFlags search_flags;
    search->add_option("--image", search_image, "Source image");
    search->add_option("--query", search_query, "Query text");
    search->add_option("--cell-size", search_cell, "Crop edge in pixels");
    search->add_option("--trace", search_trace, "Write the JSONL search trace here");
    search->add_option("--canvas", search_canvas, "Write the final canvas PNG here");
    search_provider.add_to(search);
    search_flags.add_to(search);

    // gen-suite
    auto* gen = app.add_subcommand("gen-suite", "Generate a synthetic task suite");
    rap::GenOptions gen_options;
    std::string gen_grid = "8x8", gen_out = "suite.json";
    gen->add_option("--count", gen_options.count, "Number of instances")->required();
    gen->add_option("--grid", gen_grid, "Lattice size, e.g. 8x8");
    gen->add_option("--mix", gen_options.single_fraction,
                    "Fraction of single-instance questions");
    gen->add_option("--seed", gen_options.seed, "Suite seed");
    gen->add_option("--out", gen_out, "Suite JSON path");

    // run / bench share the experiment flags
    rap::ExperimentConfig run_config;
    std::string run_config_path, run_variant, bench_config_path;
    auto add_experiment_flags = [&](CLI::App* cmd) {
        cmd->add_option("--suite", run_config.suite_path, "Suite JSON path");
        cmd->add_option("--k", run_config.k_values, "k values for fixed-k variants")
            ->delimiter(',');
        cmd->add_option("--provider", run_config.provider, "oracle | http")
            ->check(CLI::IsMember({"oracle", "http"}));
        cmd->add_option("--base-url", run_config.http.base_url, "HTTP backend endpoint");
        cmd->add_option("--auth-token-env", run_config.http.auth_token_env,
                        "Environment variable holding the bearer token");
        cmd->add_option("--cell-size", run_config.cell_size, "Rasterization cell edge");
        cmd->add_option("--out-dir", run_config.output_dir, "Report directory");
        cmd->add_option("--seed", run_config.seed, "Run seed (recorded in reports)");
        cmd->add_option("--workers", run_config.workers, "Parallel instance slots");
        cmd->add_option("--tau", run_config.oracle.tau, "Oracle answer threshold");
        cmd->add_option("--reference-area-cells", run_config.oracle.reference_area_cells,
                        "Oracle confidence reference area, in cells");
        cmd->add_option("--ratios", run_config.search.retention_ratios, "Retention ratios")
            ->delimiter(',');
        cmd->add_option("--bias", run_config.search.bias, "Depth-weight floor");
        cmd->add_option("--threshold", run_config.search.threshold, "Terminating confidence");
        cmd->add_option("--max-depth", run_config.search.max_depth, "Deepest tree level");
        cmd->add_option("--max-expansions", run_config.search.max_expansions,
                        "Expansion budget");
    };

    auto* run = app.add_subcommand("run", "Run an experiment over a suite");
    run->add_option("--config", run_config_path, "Experiment config JSON (flags override it)");
    run->add_option("--variant", run_variant,
                    "baseline-full-image | fixed-k-strategy-{1,2,3} | rap-full");
    run->add_flag("--traces", run_config.write_traces, "Write trace.jsonl for rap-full");
    add_experiment_flags(run);

    auto* bench = app.add_subcommand("bench", "Adaptive search vs exhaustive reference");
    bench->add_option("--config", bench_config_path, "Experiment config JSON");
    add_experiment_flags(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (tile->parsed()) {
            return cmd_tile(tile_image, tile_cell, tile_out);
        }
        if (score->parsed()) {
            return cmd_score(score_image, score_query, score_cell, score_provider, score_out);
        }
        if (layout->parsed()) {
            return cmd_layout(layout_image, layout_query, layout_cell, layout_k, layout_strategy,
                              layout_provider, layout_out);
        }
        if (search->parsed()) {
            return cmd_search(search_image, search_query, search_cell, search_provider,
                              search_flags, search_trace, search_canvas);
        }
        if (gen->parsed()) {
            if (!parse_grid_spec(gen_grid, gen_options.grid_rows, gen_options.grid_cols)) {
                throw rap::InvalidConfigError("grid spec must look like 8x8");
            }
            rap::gen_suite(gen_options, gen_out);
            std::printf("wrote %d instances to %s\n", gen_options.count, gen_out.c_str());
            return kExitOk;
        }
        if (run->parsed() || bench->parsed()) {
            // Precedence: defaults < config file < explicit flags. The flags
            // were already bound into run_config by the parser, so load the
            // file into a fresh config and copy flag values over it.
            const std::string& config_path =
                run->parsed() ? run_config_path : bench_config_path;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw rap::IoError("cannot open config: " + config_path);
                nlohmann::json doc;
                in >> doc;
                rap::ExperimentConfig from_file;
                from_json(doc, from_file);
                CLI::App* cmd = run->parsed() ? run : bench;
                auto keep_flag = [&](const std::string& name) {
                    return cmd->count(name) > 0;
                };
                if (!keep_flag("--suite")) run_config.suite_path = from_file.suite_path;
                if (!keep_flag("--k")) run_config.k_values = from_file.k_values;
                if (!keep_flag("--provider")) run_config.provider = from_file.provider;
                if (!keep_flag("--base-url")) run_config.http = from_file.http;
                if (!keep_flag("--cell-size")) run_config.cell_size = from_file.cell_size;
                if (!keep_flag("--out-dir")) run_config.output_dir = from_file.output_dir;
                if (!keep_flag("--seed")) run_config.seed = from_file.seed;
                if (!keep_flag("--workers")) run_config.workers = from_file.workers;
                if (!keep_flag("--tau")) run_config.oracle.tau = from_file.oracle.tau;
                if (!keep_flag("--reference-area-cells")) {
                    run_config.oracle.reference_area_cells = from_file.oracle.reference_area_cells;
                }
                run_config.oracle.noise_dims = from_file.oracle.noise_dims;
                if (!keep_flag("--ratios")) {
                    run_config.search.retention_ratios = from_file.search.retention_ratios;
                }
                if (!keep_flag("--bias")) run_config.search.bias = from_file.search.bias;
                if (!keep_flag("--threshold")) {
                    run_config.search.threshold = from_file.search.threshold;
                }
                if (!keep_flag("--max-depth")) run_config.search.max_depth = from_file.search.max_depth;
                if (!keep_flag("--max-expansions")) {
                    run_config.search.max_expansions = from_file.search.max_expansions;
                }
                if (run->parsed()) {
                    if (run->count("--traces") == 0) {
                        run_config.write_traces = from_file.write_traces;
                    }
                    if (run->count("--variant") == 0) {
                        run_config.variant = from_file.variant;
                    }
                }
            }
            if (!run_variant.empty()) {
                run_config.variant = rap::variant_from_string(run_variant);
            }
            if (run_config.suite_path.empty()) {
                throw rap::InvalidConfigError("a suite path is required (--suite or config file)");
            }

            if (bench->parsed()) {
                const rap::BenchReport report = rap::run_bench(run_config);
                std::printf("%s\n", report.summary.dump(2).c_str());
                return kExitOk;
            }
            const rap::ExperimentReport report = rap::run_experiment(run_config);
            std::printf("%s\n", report.summary.dump(2).c_str());
            if (report.aborted) {
                std::fprintf(stderr, "error: aborted, provider failures above 20%%\n");
                return kExitRunFailure;
            }
            return kExitOk;
        }
    } catch (const rap::InvalidInputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const rap::InvalidConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const rap::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const rap::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRunFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRunFailure;
    }
    return kExitUsage;
}
