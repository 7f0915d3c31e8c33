#include "rap/retrieval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "rap/error.hpp"
#include "rap/providers.hpp"

namespace rap {

ScoreMatrix ScoreMatrix::zeros(int rows, int cols) {
    ScoreMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.values.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    return m;
}

void ScoreMatrix::validate() const {
    if (rows < 1 || cols < 1 ||
        values.size() != static_cast<std::size_t>(rows) * cols) {
        throw InvalidInputError("score matrix dimensions inconsistent");
    }
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidInputError("score outside [0, 1]");
        }
    }
}

RetentionMask RetentionMask::zeros(int rows, int cols) {
    RetentionMask m;
    m.rows = rows;
    m.cols = cols;
    m.bits.assign(static_cast<std::size_t>(rows) * cols, 0);
    return m;
}

RetentionMask RetentionMask::full(int rows, int cols) {
    RetentionMask m = zeros(rows, cols);
    std::fill(m.bits.begin(), m.bits.end(), std::uint8_t{1});
    return m;
}

RetentionMask RetentionMask::from_cells(int rows, int cols, const std::vector<int>& cells) {
    RetentionMask m = zeros(rows, cols);
    for (int cell : cells) {
        if (cell < 0 || cell >= rows * cols) {
            throw IndexError("cell index outside mask");
        }
        m.bits[static_cast<std::size_t>(cell)] = 1;
    }
    return m;
}

int RetentionMask::count() const {
    int n = 0;
    for (auto b : bits) n += b != 0;
    return n;
}

std::vector<int> RetentionMask::set_cells() const {
    std::vector<int> cells;
    cells.reserve(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0) cells.push_back(static_cast<int>(i));
    }
    return cells;
}

double similarity(const Embedding& q, const Embedding& v) {
    if (q.size() != v.size() || q.empty()) {
        throw InvalidInputError("embedding dimensions differ (" + std::to_string(q.size()) +
                                " vs " + std::to_string(v.size()) + ")");
    }
    double dot = 0.0, qq = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        dot += q[i] * v[i];
        qq += q[i] * q[i];
        vv += v[i] * v[i];
    }
    if (qq == 0.0 || vv == 0.0) {
        throw InvalidInputError("zero-norm embedding");
    }
    const double cosine = dot / (std::sqrt(qq) * std::sqrt(vv));
    // Rounding can push |cosine| a hair past 1; clamp so the score stays in range.
    const double score = (1.0 - std::clamp(cosine, -1.0, 1.0)) * 0.5;
    return std::clamp(score, 0.0, 1.0);
}

std::optional<Embedding> EmbeddingCache::find(std::uint64_t digest, int cell) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(Key{digest, cell});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::insert(std::uint64_t digest, int cell, Embedding embedding) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.emplace(Key{digest, cell}, std::move(embedding));
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

ScoreMatrix score_crops(const std::string& query_text, const CropGrid& grid,
                        EmbeddingProvider& provider, const ScoreOptions& options) {
    if (grid.cell_count() < 1) {
        throw InvalidInputError("empty grid");
    }
    const Embedding query = provider.embed_query(query_text);

    const int n = grid.cell_count();
    const std::uint64_t digest = options.cache ? image_digest(grid.source()) : 0;

    std::vector<Embedding> embeddings(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::mutex failure_mutex;
    int failed_cell = -1;
    std::string failure_message;

    auto worker = [&]() {
        for (;;) {
            const int cell = next.fetch_add(1);
            if (cell >= n) return;
            try {
                if (options.cache) {
                    if (auto hit = options.cache->find(digest, cell)) {
                        embeddings[static_cast<std::size_t>(cell)] = std::move(*hit);
                        continue;
                    }
                }
                Embedding e = provider.embed_image(
                    grid.crop_at(grid.index_row(cell), grid.index_col(cell)));
                if (options.cache) {
                    options.cache->insert(digest, cell, e);
                }
                embeddings[static_cast<std::size_t>(cell)] = std::move(e);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (failed_cell < 0 || cell < failed_cell) {
                    failed_cell = cell;
                    failure_message = e.what();
                }
            }
        }
    };

    const int threads = std::max(1, std::min(options.max_in_flight, n));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (failed_cell >= 0) {
        throw ProviderError("embedding crop " + std::to_string(failed_cell) + " failed: " +
                                failure_message,
                            failed_cell);
    }

    ScoreMatrix scores = ScoreMatrix::zeros(grid.rows(), grid.cols());
    for (int cell = 0; cell < n; ++cell) {
        const double s = similarity(query, embeddings[static_cast<std::size_t>(cell)]);
        scores.values[static_cast<std::size_t>(cell)] = s;
    }
    return scores;
}

RetentionMask top_k(const ScoreMatrix& scores, int k) {
    scores.validate();
    const int n = scores.cell_count();
    if (k < 1 || k > n) {
        throw InvalidInputError("k must be in [1, " + std::to_string(n) + "], got " +
                                std::to_string(k));
    }
    std::vector<int> cells(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cells[static_cast<std::size_t>(i)] = i;
    const auto kept = select_lowest(scores, cells, k);
    return RetentionMask::from_cells(scores.rows, scores.cols, kept);
}

std::vector<int> select_lowest(const ScoreMatrix& scores,
                               const std::vector<int>& candidates, int k) {
    if (k < 0 || k > static_cast<int>(candidates.size())) {
        throw InvalidInputError("selection count outside candidate set");
    }
    std::vector<int> order = candidates;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = scores.at_index(a);
        const double sb = scores.at_index(b);
        if (sa != sb) return sa < sb;
        return a < b; // row-major tie break
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace rap
