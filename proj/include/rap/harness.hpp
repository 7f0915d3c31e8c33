#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rap/oracle.hpp"
#include "rap/providers.hpp"
#include "rap/search.hpp"
#include "rap/synthetic.hpp"

#include <json.hpp>

namespace rap {

enum class Variant {
    baseline_full_image,
    fixed_k_strategy_1, // top-k, strip layout, score-ascending order
    fixed_k_strategy_2, // top-k, strip layout, appearance order
    fixed_k_strategy_3, // top-k, spatial layout
    rap_full,           // adaptive-k best-first search
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& text);

struct ExperimentConfig {
    std::string suite_path;
    Variant variant = Variant::rap_full;
    std::vector<int> k_values{8};     // fixed-k variants only
    SearchParams search;
    std::string provider = "oracle";  // "oracle" | "http"
    ProviderConfig http;
    OracleOptions oracle;
    int cell_size = 64;
    std::string output_dir;
    std::uint64_t seed = 0;
    int workers = 1;
    bool write_traces = false;

    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Partial documents are fine: absent keys keep their current values.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct ResultRow {
    std::string instance_id;
    std::string variant;
    QuestionKind kind = QuestionKind::single_instance;
    int k_selected = 0;
    bool correct = false;
    int expansions = 0;
    std::string answer;
    bool provider_error = false;
    double wall_time_ms = 0.0; // feeds throughput aggregates, not the CSV
};

struct ExperimentReport {
    std::vector<ResultRow> rows;
    nlohmann::json summary;
    bool aborted = false; // provider-failure threshold tripped
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
    std::filesystem::path trace_path;
};

struct GenOptions {
    int count = 0;
    int grid_rows = 8;
    int grid_cols = 8;
    double single_fraction = 0.5; // share of single-instance questions
    std::uint64_t seed = 0;

    void validate() const;
};

/// Deterministic under (options), byte-for-byte.
std::vector<SyntheticInstance> generate_suite(const GenOptions& options);
void gen_suite(const GenOptions& options, const std::filesystem::path& out_path);

/// Runs every instance (x every k for fixed-k variants) through the selected
/// pipeline variant. Provider errors are recorded per row and the run
/// continues; more than 20% failed instances aborts the run (report.aborted).
/// Writes results.csv, summary.json and, when configured, trace.jsonl under
/// config.output_dir. The CSV and trace bytes are deterministic for the
/// oracle provider regardless of worker count.
ExperimentReport run_experiment(const ExperimentConfig& config);

struct SingleRunResult {
    std::string answer;
    int selected_k = 0;
    double confidence = 0.0;
    Termination termination = Termination::frontier_exhausted;
    int expansions = 0;
};

/// Full pipeline on one image: partition, score, search, answer.
SingleRunResult run_single(std::shared_ptr<const Image> image, const std::string& question,
                           EmbeddingProvider& embedder, ConfidenceProvider& model,
                           int cell_size, const SearchParams& params,
                           const TraceSink& trace_sink = {});

/// Naive reference that visits every reachable retention state (the
/// all-nodes baseline the adaptive search is benchmarked against) and
/// answers from the most confident one.
struct ExhaustiveOutcome {
    Canvas final_canvas;
    int selected_k = 0;
    double confidence = 0.0;
    int expansions = 0;
    int states_visited = 0;
};

ExhaustiveOutcome exhaustive_search(const CropGrid& grid, const ScoreMatrix& scores,
                                    ConfidenceProvider& provider, const std::string& query,
                                    const SearchParams& params = {});

struct BenchReport {
    nlohmann::json summary;
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
};

/// Adaptive search vs exhaustive reference on one suite: accuracy, total
/// expansions, and wall-clock throughput (instances per minute).
BenchReport run_bench(const ExperimentConfig& config);

/// Fixed CSV schema shared by reports (documented in the README).
std::string results_csv_header();
void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

} // namespace rap
