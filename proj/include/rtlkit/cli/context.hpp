#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlkit/annotate/chat_client.hpp"
#include "rtlkit/annotate/prompts.hpp"
#include "rtlkit/cli/config.hpp"
#include "rtlkit/cli/manifest.hpp"
#include "rtlkit/common/parallel.hpp"
#include "rtlkit/common/transcript.hpp"
#include "rtlkit/corpus/syntax.hpp"
#include "rtlkit/embedcore/embed_client.hpp"
#include "rtlkit/rewrite/lec.hpp"

#ifndef RTLKIT_SHARE_DIR
#define RTLKIT_SHARE_DIR "share/rtlkit"
#endif

namespace rtlkit::cli {

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::size_t jobs = default_jobs();
    std::string config_path;
    std::string record_dir;
    std::string replay_dir;
    std::string out_dir = ".";
};

/// State for one command invocation: validated config, declared inputs and
/// outputs, and the service clients chosen by the record/replay flags.
class RunContext {
public:
    RunContext(std::string command, GlobalOptions g, ordered_json config)
        : g_(std::move(g)), config_(std::move(config)), start_(std::chrono::steady_clock::now()) {
        if (!g_.record_dir.empty() && !g_.replay_dir.empty())
            fail(ErrorKind::Usage, "--record and --replay are mutually exclusive");
        manifest_.command = std::move(command);
        manifest_.seed = g_.seed;
        manifest_.config = config_;
        manifest_.tool_versions["rtlkit"] = RTLKIT_VERSION;
#ifdef __VERSION__
        manifest_.tool_versions["compiler"] = __VERSION__;
#endif
    }

    const GlobalOptions& globals() const { return g_; }
    const ordered_json& config() const { return config_; }
    const ordered_json& cfg(const std::string& section, const std::string& key) const {
        return config_.at(section).at(key);
    }
    std::size_t jobs() const { return std::max<std::size_t>(g_.jobs, 1); }
    std::uint64_t seed() const { return g_.seed; }
    RunManifest& manifest() { return manifest_; }

    /// Declares an input; a missing path is a domain error naming the path.
    std::filesystem::path input(const std::string& path) {
        if (!std::filesystem::exists(path)) fail(ErrorKind::InvalidInput, "input not found: " + path);
        manifest_.add_input(path);
        return path;
    }

    std::filesystem::path output(const std::string& name) {
        auto p = std::filesystem::path(g_.out_dir) / name;
        outputs_.push_back(p);
        return p;
    }

    void note_tool(const std::string& name, const std::string& value) { manifest_.tool_versions[name] = value; }

    /// Hashes every declared output that exists and writes manifest.json.
    std::filesystem::path finish() {
        for (const auto& p : outputs_)
            if (std::filesystem::exists(p)) manifest_.add_output(p);
        manifest_.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        auto path = std::filesystem::path(g_.out_dir) / "manifest.json";
        write_file(path, manifest_.to_json().dump(2) + "\n");
        return path;
    }

    annotate::PromptLibrary prompts() {
        const auto dir = config_.at("prompts_dir").get<std::string>();
        if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "prompt template directory not found: " + dir);
        manifest_.add_input(dir);
        return annotate::PromptLibrary::load(dir);
    }

    annotate::ChatClient& chat() {
        if (!chat_) {
            if (replaying()) {
                chat_transcript_ = open_replay("chat.jsonl");
                chat_ = std::make_unique<annotate::ReplayChatClient>(*chat_transcript_);
            } else {
                annotate::ChatClientConfig c;
                c.endpoint = cfg("chat", "endpoint").get<std::string>();
                c.model = cfg("chat", "model").get<std::string>();
                c.temperature = cfg("chat", "temperature").get<double>();
                c.max_retries = cfg("chat", "max_retries").get<int>();
                c.timeout_seconds = cfg("chat", "timeout").get<double>();
                c.backoff_initial_seconds = cfg("chat", "backoff").get<double>();
                c.api_key_env = cfg("chat", "api_key_env").get<std::string>();
                live_chat_ = std::make_unique<annotate::HttpChatClient>(c);
                if (recording()) {
                    chat_transcript_ = open_record("chat.jsonl");
                    chat_ = std::make_unique<annotate::RecordingChatClient>(*live_chat_, *chat_transcript_);
                }
            }
        }
        return chat_ ? *chat_ : *live_chat_;
    }

    rewrite::LecChecker& lec() {
        if (!lec_) {
            rewrite::LecAdapterConfig c;
            c.command = cfg("rewrite", "lec_command").get<std::string>();
            c.timeout_seconds = cfg("rewrite", "lec_timeout").get<double>();
            c.equivalent_pattern = cfg("rewrite", "equivalent_pattern").get<std::string>();
            c.inequivalent_pattern = cfg("rewrite", "inequivalent_pattern").get<std::string>();
            c.validate_against(reference_lec_logs());
            note_tool("lec_command", c.command);
            if (replaying()) {
                lec_transcript_ = open_replay("lec.jsonl");
                lec_ = std::make_unique<rewrite::ReplayLecChecker>(*lec_transcript_);
            } else {
                live_lec_ = std::make_unique<rewrite::ExternalLecChecker>(c);
                if (recording()) {
                    lec_transcript_ = open_record("lec.jsonl");
                    lec_ = std::make_unique<rewrite::RecordingLecChecker>(*live_lec_, *lec_transcript_);
                }
            }
        }
        return lec_ ? *lec_ : *live_lec_;
    }

    embedcore::EmbedClient& embedder() {
        if (!embed_) {
            const auto backend = cfg("embed", "backend").get<std::string>();
            note_tool("embed_backend", backend);
            if (backend == "toy") {
                embedcore::ToyShape shape{cfg("embed", "toy_features").get<std::size_t>(),
                                          cfg("embed", "toy_dim").get<std::size_t>(),
                                          cfg("embed", "toy_vocab").get<std::size_t>()};
                embed_ = std::make_unique<embedcore::ToyEmbedClient>(embedcore::ToyParams::init(g_.seed, shape));
                return *embed_;
            }
            const auto model = cfg("embed", "model").get<std::string>();
            if (replaying()) {
                embed_transcript_ = open_replay("embed.jsonl");
                embed_ = std::make_unique<embedcore::ReplayEmbedClient>(*embed_transcript_, model);
            } else {
                embedcore::EmbedClientConfig c;
                c.endpoint = cfg("embed", "endpoint").get<std::string>();
                c.model = model;
                c.batch_size = cfg("embed", "batch_size").get<std::size_t>();
                c.timeout_seconds = cfg("embed", "timeout").get<double>();
                c.max_retries = cfg("embed", "max_retries").get<int>();
                c.api_key_env = cfg("chat", "api_key_env").get<std::string>();
                live_embed_ = std::make_unique<embedcore::HttpEmbedClient>(c);
                if (recording()) {
                    embed_transcript_ = open_record("embed.jsonl");
                    embed_ = std::make_unique<embedcore::RecordingEmbedClient>(*live_embed_, *embed_transcript_, model);
                }
            }
        }
        return embed_ ? *embed_ : *live_embed_;
    }

    std::unique_ptr<corpus::SyntaxChecker> syntax_checker() {
        const auto cmd = cfg("corpus", "syntax_command").get<std::string>();
        if (cmd.empty()) {
            note_tool("syntax_checker", "builtin");
            return std::make_unique<corpus::BuiltinSyntaxChecker>();
        }
        note_tool("syntax_checker", cmd);
        return std::make_unique<corpus::ExternalSyntaxChecker>(cmd, cfg("corpus", "syntax_timeout").get<double>());
    }

private:
    static std::map<std::string, std::string> reference_lec_logs() {
        std::map<std::string, std::string> logs;
        const auto dir = std::filesystem::path(RTLKIT_SHARE_DIR) / "lec";
        if (!std::filesystem::is_directory(dir)) return logs;
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.path().extension() == ".log") logs[e.path().filename().string()] = read_file(e.path());
        return logs;
    }

    bool replaying() const { return !g_.replay_dir.empty(); }
    bool recording() const { return !g_.record_dir.empty(); }

    std::unique_ptr<Transcript> open_replay(const std::string& name) {
        auto p = input((std::filesystem::path(g_.replay_dir) / name).string());
        return std::make_unique<Transcript>(Transcript::for_replay(p));
    }

    std::unique_ptr<Transcript> open_record(const std::string& name) {
        return std::make_unique<Transcript>(Transcript::for_recording(std::filesystem::path(g_.record_dir) / name));
    }

    GlobalOptions g_;
    ordered_json config_;
    RunManifest manifest_;
    std::vector<std::filesystem::path> outputs_;
    std::chrono::steady_clock::time_point start_;

    std::unique_ptr<Transcript> chat_transcript_, lec_transcript_, embed_transcript_;
    std::unique_ptr<annotate::ChatClient> live_chat_, chat_;
    std::unique_ptr<rewrite::LecChecker> live_lec_, lec_;
    std::unique_ptr<embedcore::EmbedClient> live_embed_, embed_;
};

} // namespace rtlkit::cli
