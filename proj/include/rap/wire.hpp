#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rap/retrieval.hpp"

#include <json.hpp>

namespace rap::wire {

inline constexpr const char* kEmbedPath = "/embed";
inline constexpr const char* kConfidencePath = "/confidence";
inline constexpr const char* kAnswerPath = "/answer";

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// POST /embed  {"kind": "text"|"image", "payload": text or base64 PNG}
//   -> {"embedding": [..]}
struct EmbedRequest {
    std::string kind;
    std::string payload;
};
struct EmbedResponse {
    Embedding embedding;
};

// POST /confidence  {"image": base64 PNG, "prompt": string}
//   -> {"yes_probability": real}
struct ConfidenceRequest {
    std::string image;
    std::string prompt;
};
struct ConfidenceResponse {
    double yes_probability = 0.0;
};

// POST /answer  {"image": base64 PNG, "question": string}
//   -> {"text": string}
struct AnswerRequest {
    std::string image;
    std::string question;
};
struct AnswerResponse {
    std::string text;
};

nlohmann::json to_json(const EmbedRequest&);
nlohmann::json to_json(const EmbedResponse&);
nlohmann::json to_json(const ConfidenceRequest&);
nlohmann::json to_json(const ConfidenceResponse&);
nlohmann::json to_json(const AnswerRequest&);
nlohmann::json to_json(const AnswerResponse&);

// Strict parsers: a missing or mistyped field raises ProtocolError.
EmbedRequest parse_embed_request(const nlohmann::json&);
EmbedResponse parse_embed_response(const nlohmann::json&);
ConfidenceRequest parse_confidence_request(const nlohmann::json&);
ConfidenceResponse parse_confidence_response(const nlohmann::json&);
AnswerRequest parse_answer_request(const nlohmann::json&);
AnswerResponse parse_answer_response(const nlohmann::json&);

/// Canonical serialization: sorted keys, no whitespace. Fixture lookup and
/// the golden round-trip tests rely on this being byte-stable.
std::string dump_canonical(const nlohmann::json& j);

} // namespace rap::wire
