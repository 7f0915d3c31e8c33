#include "rap/search.hpp"

#include <algorithm>
#include <cmath>

#include "rap/error.hpp"
#include "rap/rng.hpp"

namespace rap {

void SearchParams::validate() const {
    if (retention_ratios.empty()) {
        throw InvalidConfigError("retention_ratios must not be empty");
    }
    double prev = 0.0;
    for (double p : retention_ratios) {
        if (!(p > 0.0 && p < 1.0)) {
            throw InvalidConfigError("retention ratios must lie in (0, 1)");
        }
        if (p <= prev) {
            throw InvalidConfigError("retention ratios must be strictly increasing");
        }
        prev = p;
    }
    if (!(bias >= 0.0 && bias < 1.0)) {
        throw InvalidConfigError("bias must lie in [0, 1)");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw InvalidConfigError("threshold must lie in (0, 1)");
    }
    if (max_depth < 1) {
        throw InvalidConfigError("max_depth must be at least 1");
    }
    if (max_expansions < 0) {
        throw InvalidConfigError("max_expansions must be non-negative");
    }
}

double depth_weight(int depth, double bias) {
    if (depth < 1) {
        throw InvalidInputError("depth must be at least 1");
    }
    if (!(bias >= 0.0 && bias < 1.0)) {
        throw InvalidInputError("bias must lie in [0, 1)");
    }
    const double shrink = 1.0 - 1.0 / static_cast<double>(depth);
    return (1.0 - bias) * shrink * shrink + bias;
}

double f_cost(double g, double h, int depth, double bias) {
    if (!(g >= 0.0 && g <= 1.0 && h >= 0.0 && h <= 1.0)) {
        throw InvalidInputError("g and h must lie in [0, 1]");
    }
    const double w = depth_weight(depth, bias);
    return (1.0 - w) * g + w * h;
}

double g_cost(const std::vector<int>& retained_cells, const ScoreMatrix& scores) {
    if (retained_cells.empty()) {
        throw InvalidInputError("retained set must not be empty");
    }
    double sum = 0.0;
    for (int cell : retained_cells) {
        sum += scores.at_index(cell);
    }
    return sum / static_cast<double>(retained_cells.size());
}

double h_cost(const std::vector<int>& retained_cells, const CropGrid& grid,
              ConfidenceProvider& provider, const std::string& query) {
    const RetentionMask mask =
        RetentionMask::from_cells(grid.rows(), grid.cols(), retained_cells);
    const Canvas canvas = spatial_layout(grid, mask);
    const double p = provider.yes_probability(canvas, query);
    return std::clamp(1.0 - p, 0.0, 1.0);
}

int shrink_count(int count, double ratio) {
    const int k = static_cast<int>(std::floor(static_cast<double>(count) * ratio + 0.5));
    return std::max(1, k);
}

std::uint64_t retained_digest(const std::vector<int>& cells) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (int cell : cells) {
        hash = fnv1a64(&cell, sizeof(cell), hash);
    }
    return hash;
}

void Frontier::push(int node_id, double f, int depth) {
    heap_.push(Entry{f, depth, next_seq_++, node_id});
}

int Frontier::pop() {
    if (heap_.empty()) {
        throw InvalidInputError("pop from empty frontier");
    }
    const int id = heap_.top().node_id;
    heap_.pop();
    return id;
}

double Frontier::min_f() const {
    if (heap_.empty()) {
        throw InvalidInputError("peek into empty frontier");
    }
    return heap_.top().f;
}

std::vector<SearchNode> expand(const SearchNode& node, const ScoreMatrix& scores,
                               const SearchParams& params,
                               std::unordered_set<std::uint64_t>& seen, int& next_id) {
    std::vector<SearchNode> children;
    const int n = static_cast<int>(node.retained.size());
    for (double ratio : params.retention_ratios) {
        const int k = shrink_count(n, ratio);
        if (k == n) continue; // no self-loops
        std::vector<int> cells = select_lowest(scores, node.retained, k);
        const std::uint64_t digest = retained_digest(cells);
        if (!seen.insert(digest).second) continue; // duplicate state

        SearchNode child;
        child.id = next_id++;
        child.parent_id = node.id;
        child.depth = node.depth + 1;
        child.retained = std::move(cells);
        child.g = g_cost(child.retained, scores);
        child.ratio_used = ratio;
        children.push_back(std::move(child));
    }
    return children;
}

const char* to_string(Termination t) {
    switch (t) {
    case Termination::threshold_met: return "threshold-met";
    case Termination::frontier_exhausted: return "frontier-exhausted";
    case Termination::budget_exhausted: return "budget-exhausted";
    }
    return "frontier-exhausted";
}

namespace {

Canvas compose(const CropGrid& grid, const std::vector<int>& retained) {
    return spatial_layout(grid,
                          RetentionMask::from_cells(grid.rows(), grid.cols(), retained));
}

void emit(const TraceSink& sink, const SearchNode& node) {
    if (!sink) return;
    TraceEntry entry;
    entry.node_id = node.id;
    entry.parent_id = node.parent_id;
    entry.cells = node.retained;
    entry.g = node.g;
    entry.h = node.h.value();
    entry.f = node.f;
    entry.depth = node.depth;
    sink(entry);
}

} // namespace

SearchOutcome re_search(const CropGrid& grid, const ScoreMatrix& scores,
                        ConfidenceProvider& provider, const std::string& query,
                        const SearchParams& params, const TraceSink& trace_sink) {
    params.validate();
    scores.validate();
    if (scores.rows != grid.rows() || scores.cols != grid.cols()) {
        throw InvalidInputError("score matrix dimensions do not match grid");
    }
    if (grid.cell_count() < 1) {
        throw InvalidInputError("empty grid");
    }

    std::vector<SearchNode> nodes;
    std::unordered_set<std::uint64_t> seen;
    int next_id = 0;

    SearchNode root;
    root.id = next_id++;
    root.depth = 1;
    root.retained.resize(static_cast<std::size_t>(grid.cell_count()));
    for (int i = 0; i < grid.cell_count(); ++i) root.retained[static_cast<std::size_t>(i)] = i;
    root.g = g_cost(root.retained, scores);
    root.f = f_cost(root.g, 0.0, root.depth, params.bias);
    seen.insert(retained_digest(root.retained));
    nodes.push_back(std::move(root));

    Frontier frontier;
    frontier.push(0, nodes[0].f, nodes[0].depth);

    SearchOutcome outcome;
    outcome.expansions = 0;

    double best_c = -1.0;
    int best_node = -1;
    bool budget_hit = false;

    while (!frontier.empty()) {
        const int id = frontier.pop();
        SearchNode& node = nodes[static_cast<std::size_t>(id)];

        if (!node.h.has_value()) {
            double p = 0.0;
            try {
                p = provider.yes_probability(compose(grid, node.retained), query);
            } catch (const Error& e) {
                throw SearchError(std::string("provider failed at node ") +
                                      std::to_string(id) + ": " + e.what(),
                                  outcome.visit_trace);
            }
            node.h = std::clamp(1.0 - p, 0.0, 1.0);
            node.f = f_cost(node.g, *node.h, node.depth, params.bias);
            // The key it was popped under used the parent's h; if the true
            // cost no longer beats the frontier, defer the node instead of
            // processing it out of order.
            if (!frontier.empty() && node.f > frontier.min_f()) {
                frontier.push(id, node.f, node.depth);
                continue;
            }
        }

        const double c = 1.0 - *node.h;
        outcome.visit_trace.push_back({node.id, node.f, node.g, *node.h, node.depth});
        emit(trace_sink, node);
        if (c > best_c) {
            best_c = c;
            best_node = id;
        }

        if (c > params.threshold) {
            outcome.termination = Termination::threshold_met;
            outcome.final_node_id = id;
            outcome.selected_k = static_cast<int>(node.retained.size());
            outcome.confidence = c;
            outcome.final_canvas = compose(grid, node.retained);
            return outcome;
        }

        if (node.depth >= params.max_depth) continue;
        if (outcome.expansions >= params.max_expansions) {
            budget_hit = true;
            break;
        }
        ++outcome.expansions;

        // Index-based access: expand may reallocate `nodes`.
        const std::size_t node_index = static_cast<std::size_t>(id);
        auto children = expand(nodes[node_index], scores, params, seen, next_id);
        const double parent_h = *nodes[node_index].h;
        for (auto& child : children) {
            child.f = f_cost(child.g, parent_h, child.depth, params.bias);
            frontier.push(child.id, child.f, child.depth);
            nodes.push_back(std::move(child));
        }
    }

    outcome.termination =
        budget_hit ? Termination::budget_exhausted : Termination::frontier_exhausted;
    const SearchNode& fallback = nodes[static_cast<std::size_t>(best_node)];
    outcome.final_node_id = fallback.id;
    outcome.selected_k = static_cast<int>(fallback.retained.size());
    outcome.confidence = best_c;
    outcome.final_canvas = compose(grid, fallback.retained);
    return outcome;
}

} // namespace rap
