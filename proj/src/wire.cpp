#include "rap/wire.hpp"

#include "rap/error.hpp"

namespace rap::wire {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_symbol(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

const nlohmann::json& field(const nlohmann::json& j, const char* name,
                            nlohmann::json::value_t type) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw ProtocolError(std::string("missing field: ") + name);
    }
    const bool numeric_ok =
        type == nlohmann::json::value_t::number_float && it->is_number();
    if (it->type() != type && !numeric_ok) {
        throw ProtocolError(std::string("field has wrong type: ") + name);
    }
    return *it;
}

} // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back(kAlphabet[v & 63]);
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) {
        throw ProtocolError("base64 length not a multiple of 4");
    }
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) {
                    throw ProtocolError("unexpected base64 padding");
                }
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) {
                    throw ProtocolError("base64 data after padding");
                }
                vals[k] = decode_symbol(c);
                if (vals[k] < 0) {
                    throw ProtocolError("invalid base64 symbol");
                }
            }
        }
        const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

nlohmann::json to_json(const EmbedRequest& r) {
    return {{"kind", r.kind}, {"payload", r.payload}};
}

nlohmann::json to_json(const EmbedResponse& r) {
    return {{"embedding", r.embedding}};
}

nlohmann::json to_json(const ConfidenceRequest& r) {
    return {{"image", r.image}, {"prompt", r.prompt}};
}

nlohmann::json to_json(const ConfidenceResponse& r) {
    return {{"yes_probability", r.yes_probability}};
}

nlohmann::json to_json(const AnswerRequest& r) {
    return {{"image", r.image}, {"question", r.question}};
}

nlohmann::json to_json(const AnswerResponse& r) {
    return {{"text", r.text}};
}

EmbedRequest parse_embed_request(const nlohmann::json& j) {
    EmbedRequest r;
    r.kind = field(j, "kind", nlohmann::json::value_t::string).get<std::string>();
    r.payload = field(j, "payload", nlohmann::json::value_t::string).get<std::string>();
    if (r.kind != "text" && r.kind != "image") {
        throw ProtocolError("embed kind must be \"text\" or \"image\"");
    }
    return r;
}

EmbedResponse parse_embed_response(const nlohmann::json& j) {
    EmbedResponse r;
    const auto& arr = field(j, "embedding", nlohmann::json::value_t::array);
    for (const auto& v : arr) {
        if (!v.is_number()) {
            throw ProtocolError("embedding entries must be numbers");
        }
        r.embedding.push_back(v.get<double>());
    }
    if (r.embedding.empty()) {
        throw ProtocolError("embedding must not be empty");
    }
    return r;
}

ConfidenceRequest parse_confidence_request(const nlohmann::json& j) {
    ConfidenceRequest r;
    r.image = field(j, "image", nlohmann::json::value_t::string).get<std::string>();
    r.prompt = field(j, "prompt", nlohmann::json::value_t::string).get<std::string>();
    return r;
}

ConfidenceResponse parse_confidence_response(const nlohmann::json& j) {
    ConfidenceResponse r;
    r.yes_probability =
        field(j, "yes_probability", nlohmann::json::value_t::number_float).get<double>();
    if (!(r.yes_probability >= 0.0 && r.yes_probability <= 1.0)) {
        throw ProtocolError("yes_probability outside [0, 1]");
    }
    return r;
}

AnswerRequest parse_answer_request(const nlohmann::json& j) {
    AnswerRequest r;
    r.image = field(j, "image", nlohmann::json::value_t::string).get<std::string>();
    r.question = field(j, "question", nlohmann::json::value_t::string).get<std::string>();
    return r;
}

AnswerResponse parse_answer_response(const nlohmann::json& j) {
    AnswerResponse r;
    r.text = field(j, "text", nlohmann::json::value_t::string).get<std::string>();
    return r;
}

std::string dump_canonical(const nlohmann::json& j) {
    return j.dump();
}

} // namespace rap::wire
