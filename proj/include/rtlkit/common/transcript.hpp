#pragma once

#include <algorithm>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/hash.hpp"
#include "rtlkit/common/io.hpp"
#include "rtlkit/common/text.hpp"

namespace rtlkit {

/// Append-only JSONL log of request/response exchanges, used to record live
/// sessions and replay them offline.
///
/// Each line is {"key": sha256(request.dump()), "request": ..., "response": ...}.
/// Identical requests replay their recorded responses in recording order.
/// A recording is rewritten in key order when closed, so concurrent sessions
/// that make the same requests produce byte-identical files.
class Transcript {
public:
    static std::string key_of(const json& request) { return sha256_hex(request.dump()); }

    /// Opens for recording; existing content is kept and appended to.
    static Transcript for_recording(std::filesystem::path path) {
        Transcript t;
        t.path_ = std::move(path);
        t.recording_ = true;
        return t;
    }

    static Transcript for_replay(const std::filesystem::path& path) {
        Transcript t;
        t.path_ = path;
        for (auto& row : read_jsonl(path)) {
            if (!row.contains("key") || !row.contains("response"))
                fail(ErrorKind::ParseError, path.string() + ": transcript row without key/response");
            t.responses_[row["key"].get<std::string>()].push_back(std::move(row["response"]));
        }
        return t;
    }

    Transcript(Transcript&& other) noexcept
        : path_(std::move(other.path_)), recording_(other.recording_),
          responses_(std::move(other.responses_)) {
        other.recording_ = false;
    }

    ~Transcript() {
        if (!recording_) return;
        try {
            canonicalize();
        } catch (...) {
            // the unsorted log is still a valid transcript
        }
    }

    /// Stable-sorts the recorded lines by key, keeping per-key order.
    void canonicalize() {
        std::lock_guard lock(mutex_);
        if (!std::filesystem::exists(path_)) return;
        std::vector<std::pair<std::string, std::string>> rows;
        const auto content = read_file(path_);
        for (auto line : text::split_lines(content)) {
            if (text::trim(line).empty()) continue;
            rows.emplace_back(json::parse(line).at("key").get<std::string>(), std::string(line));
        }
        std::stable_sort(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::string out;
        for (const auto& [key, line] : rows) out += line + "\n";
        write_file(path_, out);
    }

    void record(const json& request, const json& response) {
        std::lock_guard lock(mutex_);
        ordered_json row;
        row["key"] = key_of(request);
        row["request"] = ordered_json::parse(request.dump());
        row["response"] = ordered_json::parse(response.dump());
        append_line(path_, row.dump());
    }

    json replay(const json& request) {
        std::lock_guard lock(mutex_);
        auto key = key_of(request);
        auto it = responses_.find(key);
        if (it == responses_.end() || it->second.empty())
            fail(ErrorKind::ClientFailure,
                 "no recorded response for request " + key.substr(0, 12) + " in " + path_.string());
        json r = std::move(it->second.front());
        it->second.pop_front();
        return r;
    }

    const std::filesystem::path& path() const { return path_; }

private:
    Transcript() = default;

    std::filesystem::path path_;
    bool recording_ = false;
    std::map<std::string, std::deque<json>> responses_;
    std::mutex mutex_;
};

} // namespace rtlkit
