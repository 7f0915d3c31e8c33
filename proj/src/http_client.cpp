#include "rap/http_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "rap/error.hpp"

namespace rap {

namespace {

constexpr const char* kFixtureScheme = "fixture://";

std::string interaction_key(const std::string& path, const nlohmann::json& body) {
    return path + "\n" + wire::dump_canonical(body);
}

/// Plain JSON-over-HTTP POST via cpp-httplib. A fresh client per call keeps
/// concurrent requests independent.
class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(const ProviderConfig& config) : config_(config) {
        if (const char* token = std::getenv(config_.auth_token_env.c_str())) {
            bearer_ = token;
        }
    }

    nlohmann::json post(const std::string& path, const nlohmann::json& body) override {
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));
        httplib::Headers headers;
        if (!bearer_.empty()) {
            headers.emplace("Authorization", "Bearer " + bearer_);
        }
        auto res = client.Post(path, headers, wire::dump_canonical(body), "application/json");
        if (!res) {
            throw ProviderError("transport failure for " + path + ": " +
                                httplib::to_string(res.error()));
        }
        if (res->status >= 500) {
            throw ProviderError("server error " + std::to_string(res->status) + " for " + path);
        }
        if (res->status != 200) {
            throw ProviderError("unexpected status " + std::to_string(res->status) + " for " +
                                    path + " (not retried)",
                                -1);
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError("unparseable response body for " + path + ": " + e.what());
        }
    }

private:
    ProviderConfig config_;
    std::string bearer_;
};

bool is_retriable(const ProviderError& e) {
    // 4xx responses carry the "(not retried)" marker; everything else
    // (transport failures, 5xx) is worth another attempt.
    return std::string(e.what()).find("(not retried)") == std::string::npos;
}

} // namespace

FixtureTransport::FixtureTransport(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open fixture: " + file.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse fixture " + file.string() + ": " + e.what());
    }
    load(doc);
}

FixtureTransport::FixtureTransport(const nlohmann::json& doc) {
    load(doc);
}

void FixtureTransport::load(const nlohmann::json& doc) {
    auto it = doc.find("interactions");
    if (it == doc.end() || !it->is_array()) {
        throw ProtocolError("fixture document lacks an interactions array");
    }
    for (const auto& interaction : *it) {
        const auto path = interaction.at("path").get<std::string>();
        responses_[interaction_key(path, interaction.at("request"))] =
            interaction.at("response");
    }
}

nlohmann::json FixtureTransport::post(const std::string& path, const nlohmann::json& body) {
    auto it = responses_.find(interaction_key(path, body));
    if (it == responses_.end()) {
        throw ProviderError("no recorded interaction for " + path);
    }
    return it->second;
}

void FixtureRecorder::add(const std::string& path, const nlohmann::json& request,
                          const nlohmann::json& response) {
    interactions_.push_back({{"path", path}, {"request", request}, {"response", response}});
}

nlohmann::json FixtureRecorder::document() const {
    return {{"interactions", interactions_}};
}

void FixtureRecorder::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) {
        throw IoError("cannot write fixture: " + file.string());
    }
    out << document().dump(2) << "\n";
}

std::unique_ptr<HttpTransport> make_transport(const ProviderConfig& config) {
    config.validate();
    if (config.base_url.rfind(kFixtureScheme, 0) == 0) {
        return std::make_unique<FixtureTransport>(
            std::filesystem::path(config.base_url.substr(std::string(kFixtureScheme).size())));
    }
    return std::make_unique<HttplibTransport>(config);
}

HttpModelProvider::HttpModelProvider(const ProviderConfig& config)
    : HttpModelProvider(config, make_transport(config)) {}

HttpModelProvider::HttpModelProvider(const ProviderConfig& config,
                                     std::unique_ptr<HttpTransport> transport)
    : config_(config), transport_(std::move(transport)) {
    config_.validate();
}

nlohmann::json HttpModelProvider::post_with_retry(const std::string& path,
                                                  const nlohmann::json& body) {
    int attempt = 0;
    int backoff_ms = config_.retry_backoff_ms;
    for (;;) {
        try {
            return transport_->post(path, body);
        } catch (const ProviderError& e) {
            if (!is_retriable(e) || attempt >= config_.max_retries) {
                throw;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
            ++attempt;
        }
    }
}

Embedding HttpModelProvider::checked_embedding(const nlohmann::json& response) const {
    Embedding e = wire::parse_embed_response(response).embedding;
    bool any_nonzero = false;
    for (double v : e) {
        if (v != 0.0) {
            any_nonzero = true;
            break;
        }
    }
    if (!any_nonzero) {
        throw ProtocolError("backend returned a zero embedding");
    }
    return e;
}

Embedding HttpModelProvider::embed_query(const std::string& text) {
    if (text.empty()) {
        throw InvalidInputError("empty query text");
    }
    const wire::EmbedRequest request{"text", text};
    return checked_embedding(post_with_retry(wire::kEmbedPath, wire::to_json(request)));
}

Embedding HttpModelProvider::embed_image(const Crop& crop) {
    if (crop.pixels.empty()) {
        throw InvalidInputError("empty crop");
    }
    const wire::EmbedRequest request{"image", wire::base64_encode(encode_png(crop.pixels))};
    return checked_embedding(post_with_retry(wire::kEmbedPath, wire::to_json(request)));
}

double HttpModelProvider::yes_probability(const Canvas& canvas, const std::string& query) {
    if (query.empty()) {
        throw InvalidInputError("empty query");
    }
    const wire::ConfidenceRequest request{wire::base64_encode(encode_png(canvas.image)),
                                          confidence_prompt(query)};
    return wire::parse_confidence_response(
               post_with_retry(wire::kConfidencePath, wire::to_json(request)))
        .yes_probability;
}

std::string HttpModelProvider::answer(const Canvas& canvas, const std::string& query) {
    if (query.empty()) {
        throw InvalidInputError("empty query");
    }
    const wire::AnswerRequest request{wire::base64_encode(encode_png(canvas.image)), query};
    return wire::parse_answer_response(post_with_retry(wire::kAnswerPath, wire::to_json(request)))
        .text;
}

} // namespace rap
