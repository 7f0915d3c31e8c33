#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rap/grid.hpp"

namespace rap {

class EmbeddingProvider;

using Embedding = std::vector<double>;

/// Per-crop dissimilarity against the query, aligned to a CropGrid.
/// Every entry is in [0, 1]; 0 means the crop points exactly along the
/// query embedding, 1 means exactly opposite.
struct ScoreMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values; // row-major

    static ScoreMatrix zeros(int rows, int cols);

    double at(int row, int col) const { return values[idx(row, col)]; }
    double at_index(int cell) const { return values[static_cast<std::size_t>(cell)]; }
    void set(int row, int col, double v) { values[idx(row, col)] = v; }
    int cell_count() const { return rows * cols; }

    /// Throws InvalidInputError unless dimensions match and all entries
    /// lie in [0, 1].
    void validate() const;

private:
    std::size_t idx(int row, int col) const {
        return static_cast<std::size_t>(row) * cols + col;
    }
};

/// Binary keep/drop matrix over grid cells.
struct RetentionMask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> bits; // row-major, 0 or 1

    static RetentionMask zeros(int rows, int cols);
    static RetentionMask full(int rows, int cols);
    static RetentionMask from_cells(int rows, int cols, const std::vector<int>& cells);

    bool at(int row, int col) const {
        return bits[static_cast<std::size_t>(row) * cols + col] != 0;
    }
    void set(int row, int col, bool v) {
        bits[static_cast<std::size_t>(row) * cols + col] = v ? 1 : 0;
    }
    int count() const;
    /// Row-major indices of set cells.
    std::vector<int> set_cells() const;
};

/// Dissimilarity of Eq.-style scoring: (1 - cos(q, v)) / 2.
/// Symmetric, scale-invariant for positive scales, range [0, 1].
/// Throws InvalidInputError on dimension mismatch or a zero-norm vector.
double similarity(const Embedding& q, const Embedding& v);

/// Thread-safe crop-embedding cache keyed by (source digest, cell index).
class EmbeddingCache {
public:
    std::optional<Embedding> find(std::uint64_t digest, int cell) const;
    void insert(std::uint64_t digest, int cell, Embedding embedding);
    std::size_t size() const;

private:
    struct Key {
        std::uint64_t digest;
        int cell;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return static_cast<std::size_t>(k.digest ^ (static_cast<std::uint64_t>(k.cell) * 0x9e3779b97f4a7c15ULL));
        }
    };

    mutable std::mutex mutex_;
    std::unordered_map<Key, Embedding, KeyHash> entries_;
};

struct ScoreOptions {
    /// Upper bound on concurrent embed_image calls.
    int max_in_flight = 4;
    /// Optional shared cache; keyed by (source image digest, cell index).
    EmbeddingCache* cache = nullptr;
};

/// Embeds the query once, embeds (or recalls) every crop, and assembles the
/// full dissimilarity matrix. A provider failure is rethrown as a
/// ProviderError carrying the first failing cell in row-major order; no
/// partial matrix is returned.
ScoreMatrix score_crops(const std::string& query_text, const CropGrid& grid,
                        EmbeddingProvider& provider, const ScoreOptions& options = {});

/// Keeps the k cells with the smallest scores; ties broken by row-major cell
/// order (earlier cell wins). Throws InvalidInputError unless 1 <= k <= R*C.
RetentionMask top_k(const ScoreMatrix& scores, int k);

/// The k lowest-score cells among `candidates` (same tie rule). Candidates
/// must be distinct row-major indices. Used by the retention-tree expansion.
std::vector<int> select_lowest(const ScoreMatrix& scores,
                               const std::vector<int>& candidates, int k);

} // namespace rap
