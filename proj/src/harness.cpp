#include "rap/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "rap/error.hpp"
#include "rap/http_client.hpp"
#include "rap/rng.hpp"

namespace rap {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::baseline_full_image: return "baseline-full-image";
    case Variant::fixed_k_strategy_1: return "fixed-k-strategy-1";
    case Variant::fixed_k_strategy_2: return "fixed-k-strategy-2";
    case Variant::fixed_k_strategy_3: return "fixed-k-strategy-3";
    case Variant::rap_full: return "rap-full";
    }
    return "rap-full";
}

Variant variant_from_string(const std::string& text) {
    if (text == "baseline-full-image") return Variant::baseline_full_image;
    if (text == "fixed-k-strategy-1") return Variant::fixed_k_strategy_1;
    if (text == "fixed-k-strategy-2") return Variant::fixed_k_strategy_2;
    if (text == "fixed-k-strategy-3") return Variant::fixed_k_strategy_3;
    if (text == "rap-full") return Variant::rap_full;
    throw InvalidConfigError("unknown variant: " + text);
}

namespace {

bool is_fixed_k(Variant v) {
    return v == Variant::fixed_k_strategy_1 || v == Variant::fixed_k_strategy_2 ||
           v == Variant::fixed_k_strategy_3;
}

} // namespace

void ExperimentConfig::validate() const {
    if (provider != "oracle" && provider != "http") {
        throw InvalidConfigError("provider must be \"oracle\" or \"http\"");
    }
    if (provider == "http") {
        if (http.base_url.empty()) {
            throw InvalidConfigError("http provider requires a base_url");
        }
        http.validate();
    }
    if (is_fixed_k(variant)) {
        if (k_values.empty()) {
            throw InvalidConfigError("fixed-k variants need at least one k value");
        }
        for (int k : k_values) {
            if (k < 1) {
                throw InvalidConfigError("k values must be positive");
            }
        }
    }
    if (cell_size < kMinCellSize) {
        throw InvalidConfigError("cell_size must be at least " + std::to_string(kMinCellSize));
    }
    if (workers < 1) {
        throw InvalidConfigError("workers must be at least 1");
    }
    search.validate();
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = {{"suite", c.suite_path},
         {"variant", to_string(c.variant)},
         {"k_values", c.k_values},
         {"provider", c.provider},
         {"cell_size", c.cell_size},
         {"output_dir", c.output_dir},
         {"seed", c.seed},
         {"workers", c.workers},
         {"write_traces", c.write_traces},
         {"search",
          {{"retention_ratios", c.search.retention_ratios},
           {"bias", c.search.bias},
           {"threshold", c.search.threshold},
           {"max_depth", c.search.max_depth},
           {"max_expansions", c.search.max_expansions}}},
         {"http",
          {{"base_url", c.http.base_url},
           {"timeout_ms", c.http.timeout_ms},
           {"max_retries", c.http.max_retries},
           {"retry_backoff_ms", c.http.retry_backoff_ms},
           {"auth_token_env", c.http.auth_token_env},
           {"max_in_flight", c.http.max_in_flight}}},
         {"oracle",
          {{"tau", c.oracle.tau},
           {"reference_area_cells", c.oracle.reference_area_cells},
           {"noise_dims", c.oracle.noise_dims}}}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    auto opt = [&j](const char* key, auto& target) {
        if (auto it = j.find(key); it != j.end()) {
            target = it->template get<std::decay_t<decltype(target)>>();
        }
    };
    opt("suite", c.suite_path);
    if (auto it = j.find("variant"); it != j.end()) {
        c.variant = variant_from_string(it->get<std::string>());
    }
    opt("k_values", c.k_values);
    opt("provider", c.provider);
    opt("cell_size", c.cell_size);
    opt("output_dir", c.output_dir);
    opt("seed", c.seed);
    opt("workers", c.workers);
    opt("write_traces", c.write_traces);
    if (auto it = j.find("search"); it != j.end()) {
        const auto& s = *it;
        auto sopt = [&s](const char* key, auto& target) {
            if (auto f = s.find(key); f != s.end()) {
                target = f->template get<std::decay_t<decltype(target)>>();
            }
        };
        sopt("retention_ratios", c.search.retention_ratios);
        sopt("bias", c.search.bias);
        sopt("threshold", c.search.threshold);
        sopt("max_depth", c.search.max_depth);
        sopt("max_expansions", c.search.max_expansions);
    }
    if (auto it = j.find("http"); it != j.end()) {
        const auto& s = *it;
        auto hopt = [&s](const char* key, auto& target) {
            if (auto f = s.find(key); f != s.end()) {
                target = f->template get<std::decay_t<decltype(target)>>();
            }
        };
        hopt("base_url", c.http.base_url);
        hopt("timeout_ms", c.http.timeout_ms);
        hopt("max_retries", c.http.max_retries);
        hopt("retry_backoff_ms", c.http.retry_backoff_ms);
        hopt("auth_token_env", c.http.auth_token_env);
        hopt("max_in_flight", c.http.max_in_flight);
    }
    if (auto it = j.find("oracle"); it != j.end()) {
        const auto& s = *it;
        auto oopt = [&s](const char* key, auto& target) {
            if (auto f = s.find(key); f != s.end()) {
                target = f->template get<std::decay_t<decltype(target)>>();
            }
        };
        oopt("tau", c.oracle.tau);
        oopt("reference_area_cells", c.oracle.reference_area_cells);
        oopt("noise_dims", c.oracle.noise_dims);
    }
}

void GenOptions::validate() const {
    if (count < 1) {
        throw InvalidInputError("suite count must be at least 1");
    }
    if (grid_rows < 1 || grid_cols < 1) {
        throw InvalidInputError("grid dimensions must be positive");
    }
    if (!(single_fraction >= 0.0 && single_fraction <= 1.0)) {
        throw InvalidInputError("single_fraction must lie in [0, 1]");
    }
    const long long singles = std::llround(single_fraction * count);
    if (singles < count && (grid_rows < 2 || grid_cols < 2)) {
        throw InvalidInputError("cross-instance questions need a grid of at least 2x2");
    }
}

namespace {

SyntheticInstance make_single(std::uint64_t seed, int rows, int cols) {
    SplitMix64 rng(seed);
    SyntheticInstance inst;
    inst.kind = QuestionKind::single_instance;
    inst.seed = seed;
    inst.grid_rows = rows;
    inst.grid_cols = cols;

    TargetSpec target;
    target.id = 1 + static_cast<int>(rng.next_below(9));
    target.attribute = attribute_palette()[rng.next_below(attribute_palette().size())];
    target.cells = {{static_cast<int>(rng.next_below(static_cast<std::uint64_t>(rows))),
                     static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cols)))}};
    inst.targets.push_back(target);
    inst.question = "What color is object " + std::to_string(target.id) + "?";
    inst.answer_key = target.attribute;
    return inst;
}

SyntheticInstance make_cross(std::uint64_t seed, int rows, int cols) {
    SplitMix64 rng(seed);
    SyntheticInstance inst;
    inst.kind = QuestionKind::cross_instance_spatial;
    inst.seed = seed;
    inst.grid_rows = rows;
    inst.grid_cols = cols;

    const int id_a = 1 + static_cast<int>(rng.next_below(9));
    int id_b = 1 + static_cast<int>(rng.next_below(9));
    if (id_b == id_a) id_b = 1 + (id_a % 9);

    const auto& palette = attribute_palette();
    const std::size_t color_a = rng.next_below(palette.size());
    const std::size_t color_b =
        (color_a + 1 + rng.next_below(palette.size() - 1)) % palette.size();

    TargetSpec a{id_a, {}, palette[color_a]};
    TargetSpec b{id_b, {}, palette[color_b]};

    const bool horizontal = (rng.next() & 1) == 0;
    if (horizontal) {
        // Same row, definitely distinct columns: the answer is the
        // left/right relation of a with respect to b.
        const int row = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(rows)));
        const int col_a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cols)));
        const int col_b = static_cast<int>(
            (static_cast<std::uint64_t>(col_a) + 1 +
             rng.next_below(static_cast<std::uint64_t>(cols - 1))) %
            static_cast<std::uint64_t>(cols));
        a.cells = {{row, col_a}};
        b.cells = {{row, col_b}};
        inst.question = "Is object " + std::to_string(id_a) + " to the left or to the right of object " +
                        std::to_string(id_b) + "?";
        inst.answer_key = col_a < col_b ? "left" : "right";
    } else {
        const int col = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cols)));
        const int row_a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(rows)));
        const int row_b = static_cast<int>(
            (static_cast<std::uint64_t>(row_a) + 1 +
             rng.next_below(static_cast<std::uint64_t>(rows - 1))) %
            static_cast<std::uint64_t>(rows));
        a.cells = {{row_a, col}};
        b.cells = {{row_b, col}};
        inst.question = "Is object " + std::to_string(id_a) + " above or below object " +
                        std::to_string(id_b) + "?";
        inst.answer_key = row_a < row_b ? "above" : "below";
    }
    inst.targets.push_back(a);
    inst.targets.push_back(b);
    return inst;
}

std::string instance_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "inst-%04d", index);
    return buf;
}

} // namespace

std::vector<SyntheticInstance> generate_suite(const GenOptions& options) {
    options.validate();
    const long long singles = std::llround(options.single_fraction * options.count);

    std::vector<SyntheticInstance> instances;
    instances.reserve(static_cast<std::size_t>(options.count));
    for (int i = 0; i < options.count; ++i) {
        // Bresenham-style interleave: exactly `singles` single-instance
        // questions, evenly spread.
        const long long before = static_cast<long long>(i) * singles / options.count;
        const long long after = static_cast<long long>(i + 1) * singles / options.count;
        const bool single = after > before;
        const std::uint64_t seed = mix_seed(options.seed, static_cast<std::uint64_t>(i));
        SyntheticInstance inst = single
                                     ? make_single(seed, options.grid_rows, options.grid_cols)
                                     : make_cross(seed, options.grid_rows, options.grid_cols);
        inst.id = instance_name(i);
        inst.validate();
        instances.push_back(std::move(inst));
    }
    return instances;
}

void gen_suite(const GenOptions& options, const std::filesystem::path& out_path) {
    save_suite(generate_suite(options), out_path);
}

namespace {

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string trace_line(const std::string& instance_id, const TraceEntry& entry) {
    nlohmann::json j = {{"instance", instance_id}, {"node", entry.node_id},
                        {"parent", entry.parent_id}, {"cells", entry.cells},
                        {"g", entry.g},             {"h", entry.h},
                        {"f", entry.f},             {"d", entry.depth}};
    return j.dump();
}

struct Task {
    std::size_t instance_index = 0;
    int k = 0; // 0 for variants that ignore k
};

struct TaskOutput {
    ResultRow row;
    std::string trace_text;
    bool done = false;
};

struct PipelineContext {
    const ExperimentConfig& config;
    const SyntheticInstance& instance;
    EmbeddingProvider& embedder;
    ConfidenceProvider& model;
};

ResultRow execute_variant(const PipelineContext& ctx, int k, std::string* trace_text) {
    const auto& config = ctx.config;
    const auto& instance = ctx.instance;

    ResultRow row;
    row.instance_id = instance.id;
    row.variant = to_string(config.variant);
    row.kind = instance.kind;

    const auto started = std::chrono::steady_clock::now();

    const CropGrid grid = partition(rasterize(instance, config.cell_size), config.cell_size);

    Canvas canvas;
    if (config.variant == Variant::baseline_full_image) {
        canvas = spatial_layout(grid, RetentionMask::full(grid.rows(), grid.cols()));
        row.k_selected = grid.cell_count();
    } else if (is_fixed_k(config.variant)) {
        if (k > grid.cell_count()) {
            throw InvalidConfigError("k=" + std::to_string(k) + " exceeds the " +
                                     std::to_string(grid.cell_count()) + "-cell grid of " +
                                     instance.id);
        }
        const ScoreMatrix scores = score_crops(instance.question, grid, ctx.embedder);
        const RetentionMask mask = top_k(scores, k);
        switch (config.variant) {
        case Variant::fixed_k_strategy_1:
            canvas = strip_layout_by_score(grid, mask, scores, StripOrder::score_ascending);
            break;
        case Variant::fixed_k_strategy_2:
            canvas = strip_layout_by_score(grid, mask, scores, StripOrder::appearance);
            break;
        default:
            canvas = spatial_layout(grid, mask);
            break;
        }
        row.k_selected = k;
    } else {
        const ScoreMatrix scores = score_crops(instance.question, grid, ctx.embedder);
        TraceSink sink;
        std::string* text = trace_text;
        if (text != nullptr) {
            sink = [text, &instance](const TraceEntry& entry) {
                *text += trace_line(instance.id, entry);
                *text += "\n";
            };
        }
        const SearchOutcome outcome =
            re_search(grid, scores, ctx.model, instance.question, config.search, sink);
        canvas = outcome.final_canvas;
        row.k_selected = outcome.selected_k;
        row.expansions = outcome.expansions;
    }

    row.answer = ctx.model.answer(canvas, instance.question);
    row.correct = row.answer == instance.answer_key;
    row.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    return row;
}

nlohmann::json summarize(const std::vector<ResultRow>& rows, double wall_ms, bool aborted,
                         const ExperimentConfig& config) {
    nlohmann::json summary;
    summary["variant"] = to_string(config.variant);
    summary["instances"] = rows.size();
    summary["aborted"] = aborted;

    if (rows.empty()) {
        summary["accuracy"] = nullptr;
        return summary;
    }

    int correct = 0;
    int provider_errors = 0;
    long long expansions = 0;
    std::map<std::string, std::pair<int, int>> by_kind; // kind -> (correct, total)
    std::map<int, std::pair<int, int>> by_k;            // k -> (correct, total)
    std::map<int, int> k_histogram;
    std::map<std::string, std::vector<int>> k_by_kind;

    for (const auto& row : rows) {
        correct += row.correct ? 1 : 0;
        provider_errors += row.provider_error ? 1 : 0;
        expansions += row.expansions;
        auto& kind_bucket = by_kind[to_string(row.kind)];
        kind_bucket.first += row.correct ? 1 : 0;
        kind_bucket.second += 1;
        auto& k_bucket = by_k[row.k_selected];
        k_bucket.first += row.correct ? 1 : 0;
        k_bucket.second += 1;
        k_histogram[row.k_selected] += 1;
        k_by_kind[to_string(row.kind)].push_back(row.k_selected);
    }

    summary["accuracy"] = static_cast<double>(correct) / static_cast<double>(rows.size());
    summary["provider_errors"] = provider_errors;
    summary["expansions_total"] = expansions;
    summary["expansions_mean"] =
        static_cast<double>(expansions) / static_cast<double>(rows.size());

    nlohmann::json kinds;
    for (const auto& [kind, bucket] : by_kind) {
        kinds[kind] = {{"correct", bucket.first},
                       {"total", bucket.second},
                       {"accuracy", static_cast<double>(bucket.first) / bucket.second}};
    }
    summary["by_kind"] = kinds;

    nlohmann::json ks;
    for (const auto& [k, bucket] : by_k) {
        ks[std::to_string(k)] = {{"correct", bucket.first},
                                 {"total", bucket.second},
                                 {"accuracy", static_cast<double>(bucket.first) / bucket.second}};
    }
    summary["by_k"] = ks;

    nlohmann::json hist;
    for (const auto& [k, n] : k_histogram) {
        hist[std::to_string(k)] = n;
    }
    summary["k_histogram"] = hist;

    auto median = [](std::vector<int> values) {
        std::sort(values.begin(), values.end());
        const std::size_t mid = values.size() / 2;
        if (values.size() % 2 == 1) return static_cast<double>(values[mid]);
        return 0.5 * (values[mid - 1] + values[mid]);
    };
    nlohmann::json medians;
    double mean_k = 0.0;
    for (const auto& row : rows) mean_k += row.k_selected;
    summary["mean_k_selected"] = mean_k / static_cast<double>(rows.size());
    for (const auto& [kind, values] : k_by_kind) {
        medians[kind] = median(values);
    }
    summary["median_k_by_kind"] = medians;

    summary["wall_time_ms"] = wall_ms;
    if (wall_ms > 0.0) {
        summary["throughput_instances_per_min"] =
            static_cast<double>(rows.size()) / (wall_ms / 60000.0);
    } else {
        summary["throughput_instances_per_min"] = nullptr;
    }
    return summary;
}

} // namespace

std::string results_csv_header() {
    return "instance_id,variant,question_kind,k_selected,correct,expansions,provider_error,answer";
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write CSV: " + path.string());
    }
    out << results_csv_header() << "\n";
    for (const auto& row : rows) {
        out << csv_escape(row.instance_id) << ',' << csv_escape(row.variant) << ','
            << to_string(row.kind) << ',' << row.k_selected << ','
            << (row.correct ? "true" : "false") << ',' << row.expansions << ','
            << (row.provider_error ? "true" : "false") << ',' << csv_escape(row.answer) << "\n";
    }
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::vector<SyntheticInstance> instances = load_suite(config.suite_path);

    std::filesystem::path out_dir = config.output_dir.empty()
                                        ? std::filesystem::path(".")
                                        : std::filesystem::path(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    std::vector<Task> tasks;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (is_fixed_k(config.variant)) {
            for (int k : config.k_values) {
                tasks.push_back({i, k});
            }
        } else {
            tasks.push_back({i, 0});
        }
    }

    std::vector<TaskOutput> outputs(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<int> failed_instances{0};
    std::atomic<bool> stop{false};
    const int failure_limit = static_cast<int>(instances.size() / 5); // abort beyond 20%

    // One provider pair per instance for the oracle; a single shared client
    // for HTTP (its transport is per-call).
    std::unique_ptr<HttpModelProvider> http_provider;
    if (config.provider == "http") {
        http_provider = std::make_unique<HttpModelProvider>(config.http);
    }

    const bool want_traces = config.write_traces && config.variant == Variant::rap_full;
    const auto run_started = std::chrono::steady_clock::now();

    auto worker = [&]() {
        for (;;) {
            if (stop.load()) return;
            const std::size_t index = next.fetch_add(1);
            if (index >= tasks.size()) return;
            const Task& task = tasks[index];
            const SyntheticInstance& instance = instances[task.instance_index];
            TaskOutput& slot = outputs[index];
            try {
                std::unique_ptr<OracleProvider> oracle;
                EmbeddingProvider* embedder = http_provider.get();
                ConfidenceProvider* model = http_provider.get();
                if (config.provider == "oracle") {
                    OracleOptions opts = config.oracle;
                    oracle = std::make_unique<OracleProvider>(instance, config.cell_size, opts);
                    embedder = oracle.get();
                    model = oracle.get();
                }
                PipelineContext ctx{config, instance, *embedder, *model};
                slot.row = execute_variant(ctx, task.k, want_traces ? &slot.trace_text : nullptr);
            } catch (const Error& e) {
                slot.row.instance_id = instance.id;
                slot.row.variant = to_string(config.variant);
                slot.row.kind = instance.kind;
                slot.row.k_selected = task.k;
                slot.row.provider_error = true;
                slot.row.answer = std::string("error: ") + e.what();
                const int failures = failed_instances.fetch_add(1) + 1;
                if (failures > failure_limit) {
                    stop.store(true);
                }
            }
            slot.done = true;
        }
    };

    const int workers = std::max(1, std::min<int>(config.workers,
                                                  static_cast<int>(tasks.size() ? tasks.size() : 1)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - run_started)
                               .count();

    ExperimentReport report;
    report.aborted = stop.load();
    for (const auto& slot : outputs) {
        if (slot.done) report.rows.push_back(slot.row);
    }
    report.summary = summarize(report.rows, wall_ms, report.aborted, config);

    report.csv_path = out_dir / "results.csv";
    write_results_csv(report.rows, report.csv_path);

    report.summary_path = out_dir / "summary.json";
    {
        std::ofstream out(report.summary_path);
        if (!out) {
            throw IoError("cannot write summary: " + report.summary_path.string());
        }
        out << report.summary.dump(2) << "\n";
    }

    if (want_traces) {
        report.trace_path = out_dir / "trace.jsonl";
        std::ofstream out(report.trace_path, std::ios::binary);
        if (!out) {
            throw IoError("cannot write trace: " + report.trace_path.string());
        }
        for (const auto& slot : outputs) {
            if (slot.done) out << slot.trace_text;
        }
    }
    return report;
}

SingleRunResult run_single(std::shared_ptr<const Image> image, const std::string& question,
                           EmbeddingProvider& embedder, ConfidenceProvider& model,
                           int cell_size, const SearchParams& params,
                           const TraceSink& trace_sink) {
    const CropGrid grid = partition(std::move(image), cell_size);
    const ScoreMatrix scores = score_crops(question, grid, embedder);
    const SearchOutcome outcome = re_search(grid, scores, model, question, params, trace_sink);

    SingleRunResult result;
    result.answer = model.answer(outcome.final_canvas, question);
    result.selected_k = outcome.selected_k;
    result.confidence = outcome.confidence;
    result.termination = outcome.termination;
    result.expansions = outcome.expansions;
    return result;
}

ExhaustiveOutcome exhaustive_search(const CropGrid& grid, const ScoreMatrix& scores,
                                    ConfidenceProvider& provider, const std::string& query,
                                    const SearchParams& params) {
    params.validate();
    scores.validate();
    if (scores.rows != grid.rows() || scores.cols != grid.cols()) {
        throw InvalidInputError("score matrix dimensions do not match grid");
    }

    std::unordered_set<std::uint64_t> seen;
    int next_id = 0;

    SearchNode root;
    root.id = next_id++;
    root.depth = 1;
    root.retained.resize(static_cast<std::size_t>(grid.cell_count()));
    for (int i = 0; i < grid.cell_count(); ++i) root.retained[static_cast<std::size_t>(i)] = i;
    root.g = g_cost(root.retained, scores);
    seen.insert(retained_digest(root.retained));

    ExhaustiveOutcome outcome;
    std::deque<SearchNode> queue;
    queue.push_back(std::move(root));

    double best_c = -1.0;
    std::vector<int> best_retained;

    while (!queue.empty()) {
        SearchNode node = std::move(queue.front());
        queue.pop_front();

        const double h = h_cost(node.retained, grid, provider, query);
        ++outcome.states_visited;
        const double c = 1.0 - h;
        if (c > best_c) {
            best_c = c;
            best_retained = node.retained;
        }

        if (node.depth >= params.max_depth) continue;
        ++outcome.expansions;
        for (auto& child : expand(node, scores, params, seen, next_id)) {
            queue.push_back(std::move(child));
        }
    }

    outcome.confidence = best_c;
    outcome.selected_k = static_cast<int>(best_retained.size());
    outcome.final_canvas = spatial_layout(
        grid, RetentionMask::from_cells(grid.rows(), grid.cols(), best_retained));
    return outcome;
}

BenchReport run_bench(const ExperimentConfig& config) {
    config.validate();
    const std::vector<SyntheticInstance> instances = load_suite(config.suite_path);

    std::filesystem::path out_dir = config.output_dir.empty()
                                        ? std::filesystem::path(".")
                                        : std::filesystem::path(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    struct Lane {
        int correct = 0;
        long long expansions = 0;
        long long provider_calls = 0;
        double wall_ms = 0.0;
    };
    Lane adaptive;
    Lane exhaustive;

    for (const auto& instance : instances) {
        OracleProvider oracle(instance, config.cell_size, config.oracle);
        const CropGrid grid =
            partition(rasterize(instance, config.cell_size), config.cell_size);

        {
            const auto t0 = std::chrono::steady_clock::now();
            const ScoreMatrix scores = score_crops(instance.question, grid, oracle);
            const SearchOutcome outcome =
                re_search(grid, scores, oracle, instance.question, config.search);
            const std::string answer = oracle.answer(outcome.final_canvas, instance.question);
            adaptive.wall_ms += std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
            adaptive.correct += answer == instance.answer_key ? 1 : 0;
            adaptive.expansions += outcome.expansions;
            adaptive.provider_calls += static_cast<long long>(outcome.visit_trace.size());
        }
        {
            const auto t0 = std::chrono::steady_clock::now();
            const ScoreMatrix scores = score_crops(instance.question, grid, oracle);
            const ExhaustiveOutcome outcome =
                exhaustive_search(grid, scores, oracle, instance.question, config.search);
            const std::string answer = oracle.answer(outcome.final_canvas, instance.question);
            exhaustive.wall_ms += std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - t0)
                                      .count();
            exhaustive.correct += answer == instance.answer_key ? 1 : 0;
            exhaustive.expansions += outcome.expansions;
            exhaustive.provider_calls += outcome.states_visited;
        }
    }

    auto lane_json = [&](const Lane& lane) {
        nlohmann::json j;
        j["instances"] = instances.size();
        j["correct"] = lane.correct;
        j["accuracy"] = instances.empty()
                            ? nlohmann::json(nullptr)
                            : nlohmann::json(static_cast<double>(lane.correct) /
                                             static_cast<double>(instances.size()));
        j["expansions"] = lane.expansions;
        j["provider_calls"] = lane.provider_calls;
        j["wall_time_ms"] = lane.wall_ms;
        j["throughput_instances_per_min"] =
            lane.wall_ms > 0.0
                ? nlohmann::json(static_cast<double>(instances.size()) / (lane.wall_ms / 60000.0))
                : nlohmann::json(nullptr);
        return j;
    };

    BenchReport report;
    report.summary["adaptive"] = lane_json(adaptive);
    report.summary["exhaustive"] = lane_json(exhaustive);
    if (exhaustive.expansions > 0) {
        report.summary["expansion_ratio"] =
            static_cast<double>(adaptive.expansions) / static_cast<double>(exhaustive.expansions);
    }
    if (adaptive.wall_ms > 0.0 && exhaustive.wall_ms > 0.0) {
        report.summary["throughput_ratio"] = exhaustive.wall_ms / adaptive.wall_ms;
    }

    report.csv_path = out_dir / "bench.csv";
    {
        std::ofstream out(report.csv_path, std::ios::binary);
        if (!out) {
            throw IoError("cannot write bench CSV: " + report.csv_path.string());
        }
        out << "variant,instances,correct,expansions,provider_calls,wall_time_ms,throughput_per_min\n";
        auto line = [&](const char* name, const Lane& lane) {
            out << name << ',' << instances.size() << ',' << lane.correct << ','
                << lane.expansions << ',' << lane.provider_calls << ',' << lane.wall_ms << ','
                << (lane.wall_ms > 0.0
                        ? static_cast<double>(instances.size()) / (lane.wall_ms / 60000.0)
                        : 0.0)
                << "\n";
        };
        line("rap-full", adaptive);
        line("exhaustive", exhaustive);
    }

    report.summary_path = out_dir / "bench_summary.json";
    {
        std::ofstream out(report.summary_path);
        if (!out) {
            throw IoError("cannot write bench summary: " + report.summary_path.string());
        }
        out << report.summary.dump(2) << "\n";
    }
    return report;
}

} // namespace rap
