#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>

#include "rap/providers.hpp"
#include "rap/wire.hpp"

namespace rap {

/// Transport seam under the HTTP provider: a JSON POST to a path.
/// Lets tests and offline replay swap the network away.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;

    /// Returns the parsed response body. Throws ProviderError on transport
    /// or status failure, ProtocolError on an unparseable body.
    virtual nlohmann::json post(const std::string& path, const nlohmann::json& body) = 0;
};

/// Replays a recorded session from disk. Requests are matched by
/// (path, canonical request body); an unknown request raises ProviderError.
/// File format: {"interactions": [{"path", "request", "response"}, ...]}.
class FixtureTransport : public HttpTransport {
public:
    explicit FixtureTransport(const std::filesystem::path& file);
    explicit FixtureTransport(const nlohmann::json& doc);

    nlohmann::json post(const std::string& path, const nlohmann::json& body) override;

    std::size_t interaction_count() const { return responses_.size(); }

private:
    void load(const nlohmann::json& doc);

    std::unordered_map<std::string, nlohmann::json> responses_;
};

/// Accumulates interactions and writes a FixtureTransport-compatible file.
class FixtureRecorder {
public:
    void add(const std::string& path, const nlohmann::json& request,
             const nlohmann::json& response);
    nlohmann::json document() const;
    void save(const std::filesystem::path& file) const;

private:
    nlohmann::json interactions_ = nlohmann::json::array();
};

/// Builds the transport implied by config.base_url:
///   http://... / https://...  -> real client with retries
///   fixture://<path>          -> FixtureTransport replay
std::unique_ptr<HttpTransport> make_transport(const ProviderConfig& config);

/// Remote model backend speaking the JSON protocol of rap/wire.hpp.
/// Transport failures and 5xx responses are retried with exponential
/// backoff (config.retry_backoff_ms, doubling per attempt, at most
/// config.max_retries retries); 4xx responses and malformed bodies are not.
class HttpModelProvider : public EmbeddingProvider, public ConfidenceProvider {
public:
    explicit HttpModelProvider(const ProviderConfig& config);
    HttpModelProvider(const ProviderConfig& config, std::unique_ptr<HttpTransport> transport);

    Embedding embed_query(const std::string& text) override;
    Embedding embed_image(const Crop& crop) override;
    double yes_probability(const Canvas& canvas, const std::string& query) override;
    std::string answer(const Canvas& canvas, const std::string& query) override;

private:
    nlohmann::json post_with_retry(const std::string& path, const nlohmann::json& body);
    Embedding checked_embedding(const nlohmann::json& response) const;

    ProviderConfig config_;
    std::unique_ptr<HttpTransport> transport_;
};

} // namespace rap
