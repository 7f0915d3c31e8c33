#pragma once

#include <string>

#include "rap/grid.hpp"
#include "rap/layout.hpp"
#include "rap/retrieval.hpp"

namespace rap {

/// Retriever side: turns text or crop pixels into embeddings.
/// Implementations must be safe for concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Deterministic for a fixed backend and input. Throws InvalidInputError
    /// on empty text, ProviderError / ProtocolError on backend failure.
    virtual Embedding embed_query(const std::string& text) = 0;

    virtual Embedding embed_image(const Crop& crop) = 0;
};

/// Answering-model side: judges whether a composed canvas suffices to answer
/// the query, and produces the answer itself.
class ConfidenceProvider {
public:
    virtual ~ConfidenceProvider() = default;

    /// Probability that the model would say "Yes" to the sufficiency prompt.
    virtual double yes_probability(const Canvas& canvas, const std::string& query) = 0;

    virtual std::string answer(const Canvas& canvas, const std::string& query) = 0;
};

struct ProviderConfig {
    std::string base_url;                     // http://host:port or fixture://path
    int timeout_ms = 30000;
    int max_retries = 3;                      // at most 5
    int retry_backoff_ms = 200;               // doubles per attempt
    std::string auth_token_env = "RAP_API_TOKEN";
    int max_in_flight = 4;

    /// Throws InvalidConfigError when a field is out of range.
    void validate() const;
};

/// Sufficiency prompt wrapped around the user query for yes_probability.
std::string confidence_prompt(const std::string& query);

/// Sentinel answer used when the model cannot commit to an answer.
inline constexpr const char* kUnanswerable = "unanswerable";

} // namespace rap
