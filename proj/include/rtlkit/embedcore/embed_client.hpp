#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "rtlkit/annotate/chat_client.hpp"
#include "rtlkit/embedcore/toy_encoder.hpp"

namespace rtlkit::embedcore {

/// Turns texts into embedding vectors.
class EmbedClient {
public:
    virtual ~EmbedClient() = default;
    virtual std::vector<Vec> embed(const std::vector<std::string>& texts) = 0;
};

class ToyEmbedClient final : public EmbedClient {
public:
    explicit ToyEmbedClient(ToyParams params) : params_(std::move(params)) {}
    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        std::vector<Vec> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(encode(t, params_));
        return out;
    }

private:
    ToyParams params_;
};

struct EmbedClientConfig {
    std::string endpoint = "https://api.openai.com/v1/embeddings";
    std::string model = "text-embedding-3-small";
    int max_retries = 3;
    double timeout_seconds = 60.0;
    double backoff_initial_seconds = 1.0;
    std::string api_key_env = "OPENAI_API_KEY";
    std::size_t batch_size = 64;
};

inline json embed_request(const std::string& model, const std::vector<std::string>& texts) {
    return {{"model", model}, {"input", texts}};
}

/// Reads `data[i].embedding` arrays, ordered by their `index` field when present.
inline std::vector<Vec> parse_embed_response(const std::string& body, std::size_t expected) {
    try {
        auto j = json::parse(body);
        const auto& data = j.at("data");
        require(data.size() == expected, ErrorKind::ClientFailure,
                "embedding response has " + std::to_string(data.size()) + " rows, expected " +
                    std::to_string(expected));
        std::vector<Vec> out(expected);
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
            require(slot < expected && out[slot].empty(), ErrorKind::ClientFailure, "bad embedding index");
            out[slot] = data[i].at("embedding").get<Vec>();
        }
        return out;
    } catch (const json::exception& e) {
        fail(ErrorKind::ClientFailure, std::string("malformed embedding response: ") + e.what());
    }
}

class HttpEmbedClient final : public EmbedClient {
public:
    explicit HttpEmbedClient(EmbedClientConfig cfg) : cfg_(std::move(cfg)) {
        require(cfg_.batch_size > 0, ErrorKind::Precondition, "embed batch size must be > 0");
        if (!cfg_.api_key_env.empty())
            if (const char* key = std::getenv(cfg_.api_key_env.c_str())) key_ = key;
    }

    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        std::vector<Vec> out;
        for (std::size_t start = 0; start < texts.size(); start += cfg_.batch_size) {
            std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                           texts.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(texts.size(), start + cfg_.batch_size)));
            auto body = annotate::post_json_with_retry(cfg_.endpoint, embed_request(cfg_.model, chunk), key_,
                                                       cfg_.max_retries, cfg_.timeout_seconds,
                                                       cfg_.backoff_initial_seconds);
            for (auto& v : parse_embed_response(body, chunk.size())) out.push_back(std::move(v));
        }
        return out;
    }

private:
    EmbedClientConfig cfg_;
    std::string key_;
};

class RecordingEmbedClient final : public EmbedClient {
public:
    RecordingEmbedClient(EmbedClient& inner, Transcript& t, std::string model)
        : inner_(inner), transcript_(t), model_(std::move(model)) {}
    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        auto v = inner_.embed(texts);
        transcript_.record(embed_request(model_, texts), v);
        return v;
    }

private:
    EmbedClient& inner_;
    Transcript& transcript_;
    std::string model_;
};

class ReplayEmbedClient final : public EmbedClient {
public:
    ReplayEmbedClient(Transcript& t, std::string model) : transcript_(t), model_(std::move(model)) {}
    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        try {
            return transcript_.replay(embed_request(model_, texts)).get<std::vector<Vec>>();
        } catch (const json::exception& e) {
            fail(ErrorKind::ParseError, std::string("recorded embeddings malformed: ") + e.what());
        }
    }

private:
    Transcript& transcript_;
    std::string model_;
};

} // namespace rtlkit::embedcore
