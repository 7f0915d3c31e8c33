#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "rap/error.hpp"
#include "rap/layout.hpp"
#include "rap/providers.hpp"
#include "rap/retrieval.hpp"

namespace rap {

struct SearchParams {
    /// Child retention ratios, strictly increasing, each in (0, 1).
    std::vector<double> retention_ratios{0.25, 0.5, 0.75};
    /// Floor of the depth weight (trust in model confidence at the root).
    double bias = 0.2;
    /// Confidence level that terminates the search.
    double threshold = 0.6;
    int max_depth = 8;
    int max_expansions = 64;

    void validate() const;
};

/// Depth-dependent mixing weight: (1 - bias) * (1 - 1/depth)^2 + bias.
/// Nondecreasing in depth, equals bias at depth 1, approaches 1 from below.
/// Throws InvalidInputError when depth < 1.
double depth_weight(int depth, double bias);

/// Combined cost (1 - w) * g + w * h with w = depth_weight(depth, bias).
/// Always lies in [min(g, h), max(g, h)].
double f_cost(double g, double h, int depth, double bias);

/// Mean dissimilarity over the retained cells (the path cost).
double g_cost(const std::vector<int>& retained_cells, const ScoreMatrix& scores);

/// One minus the model's yes-probability for the canvas composed from the
/// retained cells (the goal-distance estimate).
double h_cost(const std::vector<int>& retained_cells, const CropGrid& grid,
              ConfidenceProvider& provider, const std::string& query);

/// Child size under retention ratio p: max(1, round-half-up(count * p)).
int shrink_count(int count, double ratio);

/// Canonical digest of a retained-cell set, for duplicate-state dropping.
std::uint64_t retained_digest(const std::vector<int>& cells);

/// One retention state in the search tree. Children retain strict subsets of
/// their parent, so every root-to-node path strictly shrinks.
struct SearchNode {
    int id = 0;
    int parent_id = -1;
    int depth = 1;
    std::vector<int> retained;       // sorted row-major cell indices
    double g = 0.0;
    std::optional<double> h;         // set once evaluated on pop
    double f = 0.0;                  // frontier key (parent's h until popped)
    std::optional<double> ratio_used;
};

/// Deterministic best-first frontier. Pops the entry with minimal f; ties
/// resolved by lower depth, then earlier insertion.
class Frontier {
public:
    void push(int node_id, double f, int depth);
    int pop();
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    double min_f() const;

private:
    struct Entry {
        double f;
        int depth;
        std::uint64_t seq;
        int node_id;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.f != b.f) return a.f > b.f;
            if (a.depth != b.depth) return a.depth > b.depth;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

/// Generates the node's children: one per retention ratio, keeping the
/// lowest-score cells of the parent's retained set. Children that would not
/// shrink, and children whose retained set digest is already in `seen`, are
/// dropped. Accepted children are recorded in `seen` and numbered from
/// `next_id`.
std::vector<SearchNode> expand(const SearchNode& node, const ScoreMatrix& scores,
                               const SearchParams& params,
                               std::unordered_set<std::uint64_t>& seen, int& next_id);

struct VisitRecord {
    int node_id = 0;
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
    int depth = 1;
};

enum class Termination {
    threshold_met,
    frontier_exhausted,
    budget_exhausted,
};
const char* to_string(Termination t);

struct SearchOutcome {
    Canvas final_canvas;
    int selected_k = 0;
    double confidence = 0.0;          // c = 1 - h of the final node
    std::vector<VisitRecord> visit_trace;
    int expansions = 0;
    Termination termination = Termination::frontier_exhausted;
    int final_node_id = 0;
};

/// Raised when a provider fails mid-search; carries the trace so far.
class SearchError : public Error {
public:
    SearchError(const std::string& msg, std::vector<VisitRecord> partial_trace)
        : Error(msg), partial_trace(std::move(partial_trace)) {}

    std::vector<VisitRecord> partial_trace;
};

/// Optional per-visit sink for the JSONL trace file.
struct TraceEntry {
    int node_id = 0;
    int parent_id = -1;
    std::vector<int> cells;
    double g = 0.0;
    double h = 0.0;
    double f = 0.0;
    int depth = 1;
};
using TraceSink = std::function<void(const TraceEntry&)>;

/// Best-first search over retention states.
///
/// The root retains every cell at depth 1. Nodes are popped in (f, depth,
/// insertion) order. A popped node's h is evaluated via its composed canvas
/// (one provider call per node, memoized); children are pushed carrying the
/// parent's h until popped. If a node's recomputed f exceeds the current
/// frontier minimum it is re-pushed with the corrected key instead of being
/// processed. A node whose confidence c = 1 - h exceeds params.threshold
/// terminates the search; on frontier or budget exhaustion the visited node
/// with maximal confidence is returned instead.
SearchOutcome re_search(const CropGrid& grid, const ScoreMatrix& scores,
                        ConfidenceProvider& provider, const std::string& query,
                        const SearchParams& params = {},
                        const TraceSink& trace_sink = {});

} // namespace rap
