#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"
#include "rtlkit/common/transcript.hpp"

namespace rtlkit::annotate {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;

    static ChatRequest user(std::string model, std::string prompt, double temperature) {
        return {std::move(model), {{"user", std::move(prompt)}}, temperature};
    }
};

/// Request body of the chat-completion protocol.
inline json to_json(const ChatRequest& r) {
    json messages = json::array();
    for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    return {{"model", r.model}, {"messages", messages}, {"temperature", r.temperature}};
}

/// First choice text of a chat-completion response body.
inline std::string parse_chat_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::ClientFailure, std::string("chat response is not JSON: ") + e.what());
    }
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        fail(ErrorKind::ClientFailure, "chat response has no choices[0].message.content");
    }
}

struct ChatClientConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    int max_retries = 3;
    double timeout_seconds = 60.0;
    double temperature = 0.0;
    double backoff_initial_seconds = 1.0;
    std::string api_key_env = "OPENAI_API_KEY";

    void validate() const {
        require(max_retries >= 0, ErrorKind::Precondition, "max_retries must be >= 0");
        require(timeout_seconds > 0, ErrorKind::Precondition, "timeout must be > 0");
        require(backoff_initial_seconds >= 0, ErrorKind::Precondition, "backoff must be >= 0");
    }
};

/// Anything that turns a chat request into the first choice's text.
/// Implementations throw ErrorKind::ClientFailure when no answer is available.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Deterministic in-process client driven by a callback; counts calls.
class FunctionChatClient final : public ChatClient {
public:
    explicit FunctionChatClient(std::function<std::string(const ChatRequest&)> fn) : fn_(std::move(fn)) {}

    std::string complete(const ChatRequest& request) override {
        ++calls_;
        return fn_(request);
    }
    std::size_t calls() const { return calls_; }

private:
    std::function<std::string(const ChatRequest&)> fn_;
    std::atomic<std::size_t> calls_{0};
};

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    require(scheme_end != std::string::npos, ErrorKind::Usage, "endpoint must be an absolute URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

/// POSTs a JSON body with retries and exponential backoff; returns the response body.
inline std::string post_json_with_retry(const std::string& endpoint, const json& body,
                                        const std::string& api_key, int max_retries,
                                        double timeout_seconds, double backoff_initial_seconds) {
    auto url = split_url(endpoint);
    std::string last_error;
    double backoff = backoff_initial_seconds;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        if (attempt > 0 && backoff > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2;
        }
        httplib::Client cli(url.scheme_host_port);
        auto secs = static_cast<time_t>(timeout_seconds);
        auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = cli.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500);
        // client errors other than rate limiting will not improve on retry
        if (res->status >= 400 && res->status < 500 && res->status != 408 && res->status != 429) break;
    }
    fail(ErrorKind::ClientFailure, endpoint + ": " + last_error);
}

/// Chat-completion client over HTTP(S).
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(ChatClientConfig config) : config_(std::move(config)) {
        config_.validate();
        if (!config_.api_key_env.empty())
            if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    }

    std::string complete(const ChatRequest& request) override {
        auto body = post_json_with_retry(config_.endpoint, to_json(request), api_key_,
                                         config_.max_retries, config_.timeout_seconds,
                                         config_.backoff_initial_seconds);
        return parse_chat_response(body);
    }

private:
    ChatClientConfig config_;
    std::string api_key_;
};

/// Forwards to an inner client and appends every exchange to a transcript.
class RecordingChatClient final : public ChatClient {
public:
    RecordingChatClient(ChatClient& inner, Transcript& transcript) : inner_(inner), transcript_(transcript) {}

    std::string complete(const ChatRequest& request) override {
        auto text = inner_.complete(request);
        transcript_.record(to_json(request), text);
        return text;
    }

private:
    ChatClient& inner_;
    Transcript& transcript_;
};

/// Serves responses from a recorded transcript; unknown requests fail.
class ReplayChatClient final : public ChatClient {
public:
    explicit ReplayChatClient(Transcript& transcript) : transcript_(transcript) {}

    std::string complete(const ChatRequest& request) override {
        auto r = transcript_.replay(to_json(request));
        if (!r.is_string()) fail(ErrorKind::ParseError, "recorded chat response is not a string");
        return r.get<std::string>();
    }

private:
    Transcript& transcript_;
};

} // namespace rtlkit::annotate
