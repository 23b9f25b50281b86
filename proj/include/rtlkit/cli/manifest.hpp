#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "rtlkit/common/hash.hpp"
#include "rtlkit/common/io.hpp"

#ifndef RTLKIT_VERSION
#define RTLKIT_VERSION "0.0.0"
#endif

namespace rtlkit::cli {

inline constexpr int kManifestSchemaVersion = 1;

/// Content hash of a file, or of a directory tree as the hash of its sorted
/// (relative path, file hash) listing.
inline std::string content_hash(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(path)) return sha256_file(path);
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& e : fs::recursive_directory_iterator(path))
        if (e.is_regular_file())
            entries.emplace_back(fs::relative(e.path(), path).generic_string(), sha256_file(e.path()));
    std::sort(entries.begin(), entries.end());
    std::string listing;
    for (const auto& [rel, h] : entries) listing += rel + '\t' + h + '\n';
    return sha256_hex(listing);
}

struct FileDigest {
    std::string path;
    std::string sha256;
};

/// Provenance for one command: what was read, what was written, and how.
struct RunManifest {
    std::string command;
    ordered_json config = ordered_json::object();
    std::uint64_t seed = 0;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    ordered_json tool_versions = ordered_json::object();
    double wall_clock_seconds = 0;

    void add_input(const std::filesystem::path& p) { inputs.push_back({p.string(), content_hash(p)}); }
    void add_output(const std::filesystem::path& p) { outputs.push_back({p.string(), content_hash(p)}); }

    ordered_json to_json() const {
        auto digests = [](const std::vector<FileDigest>& v) {
            ordered_json a = ordered_json::array();
            for (const auto& d : v) a.push_back(ordered_json{{"path", d.path}, {"sha256", d.sha256}});
            return a;
        };
        ordered_json j;
        j["schema_version"] = kManifestSchemaVersion;
        j["command"] = command;
        j["seed"] = seed;
        j["config"] = config;
        j["inputs"] = digests(inputs);
        j["outputs"] = digests(outputs);
        j["tool_versions"] = tool_versions;
        j["wall_clock_seconds"] = wall_clock_seconds;
        return j;
    }

    static RunManifest from_json(const json& j) {
        try {
            require(j.at("schema_version").get<int>() == kManifestSchemaVersion, ErrorKind::ParseError,
                    "unsupported manifest schema version");
            RunManifest m;
            m.command = j.at("command").get<std::string>();
            m.seed = j.at("seed").get<std::uint64_t>();
            m.config = ordered_json::parse(j.at("config").dump());
            for (const auto& d : j.at("inputs")) m.inputs.push_back({d.at("path"), d.at("sha256")});
            for (const auto& d : j.at("outputs")) m.outputs.push_back({d.at("path"), d.at("sha256")});
            m.tool_versions = ordered_json::parse(j.at("tool_versions").dump());
            m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
            return m;
        } catch (const json::exception& e) {
            fail(ErrorKind::ParseError, std::string("malformed manifest: ") + e.what());
        }
    }
};

struct VerifyIssue {
    std::string path;
    std::string problem;
};

/// Recomputes every recorded hash. Relative paths resolve against `base`.
inline std::vector<VerifyIssue> verify_manifest(const RunManifest& m, const std::filesystem::path& base = {}) {
    std::vector<VerifyIssue> issues;
    auto check = [&](const FileDigest& d, const char* role) {
        std::filesystem::path p(d.path);
        if (p.is_relative() && !base.empty()) p = base / p;
        if (!std::filesystem::exists(p)) {
            issues.push_back({d.path, std::string(role) + " is missing"});
            return;
        }
        if (content_hash(p) != d.sha256) issues.push_back({d.path, std::string(role) + " hash differs"});
    };
    for (const auto& d : m.inputs) check(d, "input");
    for (const auto& d : m.outputs) check(d, "output");
    return issues;
}

} // namespace rtlkit::cli
