#include <doctest.h>

#include <atomic>
#include <cmath>

#include "rap/error.hpp"
#include "rap/oracle.hpp"
#include "rap/providers.hpp"
#include "rap/retrieval.hpp"
#include "rap/rng.hpp"

using namespace rap;

namespace {

Embedding random_vector(SplitMix64& rng, std::size_t dim) {
    Embedding v(dim);
    bool nonzero = false;
    for (auto& x : v) {
        x = rng.next_signed_unit();
        nonzero = nonzero || x != 0.0;
    }
    if (!nonzero) v[0] = 1.0;
    return v;
}

/// Deterministic fake retriever: every crop embeds to a fixed unit vector
/// rotated by the cell position; the query picks out cell (0,0).
struct FakeEmbedder : EmbeddingProvider {
    std::atomic<int> image_calls{0};
    std::atomic<int> query_calls{0};
    int dim = 4;

    Embedding embed_query(const std::string&) override {
        ++query_calls;
        Embedding e(static_cast<std::size_t>(dim), 0.0);
        e[0] = 1.0;
        return e;
    }
    Embedding embed_image(const Crop& crop) override {
        ++image_calls;
        Embedding e(static_cast<std::size_t>(dim), 0.0);
        e[static_cast<std::size_t>((crop.row + crop.col) % dim)] = 1.0;
        return e;
    }
};

struct MismatchedEmbedder : EmbeddingProvider {
    Embedding embed_query(const std::string&) override { return {1.0, 0.0}; }
    Embedding embed_image(const Crop& crop) override {
        if (crop.row == 0 && crop.col == 1) return {1.0, 0.0, 0.0}; // wrong dim
        return {0.0, 1.0};
    }
};

struct FailingEmbedder : EmbeddingProvider {
    Embedding embed_query(const std::string&) override { return {1.0}; }
    Embedding embed_image(const Crop& crop) override {
        if (crop.row == 1 && crop.col == 0) {
            throw ProviderError("backend down");
        }
        return {1.0};
    }
};

SyntheticInstance planted_instance(int rows, int cols, CellRef target_cell) {
    SyntheticInstance inst;
    inst.id = "planted";
    inst.grid_rows = rows;
    inst.grid_cols = cols;
    inst.targets = {{3, {target_cell}, "red"}};
    inst.question = "What color is object 3?";
    inst.kind = QuestionKind::single_instance;
    inst.answer_key = "red";
    inst.seed = 7;
    return inst;
}

} // namespace

TEST_CASE("similarity: fixed points") {
    const Embedding q{0.3, -1.2, 4.0};
    CHECK(similarity(q, q) == doctest::Approx(0.0).epsilon(1e-12));

    Embedding neg = q;
    for (auto& v : neg) v = -v;
    CHECK(similarity(q, neg) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(similarity({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("similarity: error cases") {
    CHECK_THROWS_AS(similarity({1.0, 0.0}, {1.0, 0.0, 0.0}), InvalidInputError);
    CHECK_THROWS_AS(similarity({0.0, 0.0}, {1.0, 0.0}), InvalidInputError);
    CHECK_THROWS_AS(similarity({1.0, 0.0}, {0.0, 0.0}), InvalidInputError);
    CHECK_THROWS_AS(similarity({}, {}), InvalidInputError);
}

TEST_CASE("similarity: range, symmetry and positive-scale invariance") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t dim = 1 + rng.next_below(16);
        const Embedding a = random_vector(rng, dim);
        const Embedding b = random_vector(rng, dim);
        const double s = similarity(a, b);
        REQUIRE(s >= 0.0);
        REQUIRE(s <= 1.0);
        REQUIRE(similarity(b, a) == doctest::Approx(s).epsilon(1e-12));

        const double scale = 0.001 + 100.0 * rng.next_unit();
        Embedding scaled = a;
        for (auto& v : scaled) v *= scale;
        REQUIRE(similarity(scaled, b) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("score_crops: aligned single crop scores zero") {
    const auto inst = planted_instance(1, 1, {0, 0});
    OracleProvider oracle(inst, 32);
    const CropGrid grid = partition(rasterize(inst, 32), 32);
    const ScoreMatrix scores = score_crops(inst.question, grid, oracle);
    REQUIRE(scores.rows == 1);
    REQUIRE(scores.cols == 1);
    CHECK(scores.at(0, 0) == 0.0);
}

TEST_CASE("score_crops: planted target is the strict minimum") {
    // The oracle gives the target crop exactly the query direction (cosine 1,
    // score 0) and every other crop a direction orthogonal to it (cosine 0,
    // score 1/2).
    const auto inst = planted_instance(2, 2, {0, 1});
    OracleProvider oracle(inst, 32);
    const CropGrid grid = partition(rasterize(inst, 32), 32);
    const ScoreMatrix scores = score_crops(inst.question, grid, oracle);
    CHECK(scores.at(0, 1) == 0.0);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (r == 0 && c == 1) continue;
            CHECK(scores.at(r, c) == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(scores.at(0, 1) < scores.at(r, c));
        }
    }
}

TEST_CASE("score_crops: mismatched embedding dimension fails without a partial matrix") {
    MismatchedEmbedder provider;
    const CropGrid grid = partition(Image::solid(64, 32, Rgb{}), 32);
    CHECK_THROWS_AS(score_crops("q", grid, provider), InvalidInputError);
}

TEST_CASE("score_crops: provider failure carries the crop index") {
    FailingEmbedder provider;
    const CropGrid grid = partition(Image::solid(64, 64, Rgb{}), 32);
    try {
        score_crops("q", grid, provider);
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.cell_index() == 2); // cell (1,0) on a 2x2 grid
    }
}

TEST_CASE("score_crops: query embedded exactly once, cache stops re-embedding") {
    FakeEmbedder provider;
    const CropGrid grid = partition(Image::solid(128, 128, Rgb{}), 32);
    EmbeddingCache cache;
    ScoreOptions options;
    options.cache = &cache;

    const ScoreMatrix first = score_crops("q", grid, provider, options);
    CHECK(provider.query_calls.load() == 1);
    CHECK(provider.image_calls.load() == grid.cell_count());
    CHECK(static_cast<int>(cache.size()) == grid.cell_count());

    const ScoreMatrix second = score_crops("q", grid, provider, options);
    CHECK(provider.image_calls.load() == grid.cell_count()); // all hits
    CHECK(second.values == first.values);
}

TEST_CASE("score_crops: concurrent embedding matches sequential") {
    FakeEmbedder provider;
    const CropGrid grid = partition(Image::solid(256, 256, Rgb{}), 32);

    ScoreOptions sequential;
    sequential.max_in_flight = 1;
    const ScoreMatrix a = score_crops("q", grid, provider, sequential);

    ScoreOptions parallel;
    parallel.max_in_flight = 8;
    const ScoreMatrix b = score_crops("q", grid, provider, parallel);

    CHECK(a.values == b.values);
}

TEST_CASE("top_k: keep-everything mask") {
    ScoreMatrix scores = ScoreMatrix::zeros(2, 3);
    const RetentionMask mask = top_k(scores, 6);
    CHECK(mask.count() == 6);
}

TEST_CASE("top_k: ties break in row-major order") {
    ScoreMatrix scores = ScoreMatrix::zeros(2, 2);
    scores.set(0, 0, 0.1);
    scores.set(0, 1, 0.3);
    scores.set(1, 0, 0.3);
    scores.set(1, 1, 0.9);
    const RetentionMask mask = top_k(scores, 2);
    CHECK(mask.at(0, 0));
    CHECK(mask.at(0, 1)); // beats (1,0) by row-major order
    CHECK_FALSE(mask.at(1, 0));
    CHECK_FALSE(mask.at(1, 1));
}

TEST_CASE("top_k: unique minimum at k=1") {
    ScoreMatrix scores = ScoreMatrix::zeros(2, 2);
    scores.set(0, 0, 0.6);
    scores.set(0, 1, 0.7);
    scores.set(1, 0, 0.2);
    scores.set(1, 1, 0.8);
    const RetentionMask mask = top_k(scores, 1);
    CHECK(mask.count() == 1);
    CHECK(mask.at(1, 0));
}

TEST_CASE("top_k: k outside [1, n] is rejected") {
    ScoreMatrix scores = ScoreMatrix::zeros(2, 2);
    CHECK_THROWS_AS(top_k(scores, 0), InvalidInputError);
    CHECK_THROWS_AS(top_k(scores, 5), InvalidInputError);
}

TEST_CASE("top_k selection is optimal: brute force over all k-subsets") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_below(3));
        const int cols = 1 + static_cast<int>(rng.next_below(3));
        ScoreMatrix scores = ScoreMatrix::zeros(rows, cols);
        for (auto& v : scores.values) v = rng.next_unit();
        const int n = rows * cols;
        for (int k = 1; k <= n; ++k) {
            const RetentionMask mask = top_k(scores, k);
            double selected_sum = 0.0;
            for (int cell : mask.set_cells()) selected_sum += scores.at_index(cell);

            double best = 1e300;
            for (int subset = 0; subset < (1 << n); ++subset) {
                if (__builtin_popcount(static_cast<unsigned>(subset)) != k) continue;
                double sum = 0.0;
                for (int cell = 0; cell < n; ++cell) {
                    if (subset & (1 << cell)) sum += scores.at_index(cell);
                }
                best = std::min(best, sum);
            }
            REQUIRE(selected_sum == doctest::Approx(best).epsilon(1e-12));
        }
    }
}

TEST_CASE("top_k: identical inputs give identical masks") {
    ScoreMatrix scores = ScoreMatrix::zeros(3, 3);
    SplitMix64 rng(11);
    for (auto& v : scores.values) v = rng.next_below(4) / 4.0; // force ties
    const RetentionMask a = top_k(scores, 4);
    const RetentionMask b = top_k(scores, 4);
    CHECK(a.bits == b.bits);
}
