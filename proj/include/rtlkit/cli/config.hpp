#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "rtlkit/common/io.hpp"
#include "rtlkit/corpus/filter.hpp"
#include "rtlkit/corpus/minhash.hpp"
#include "rtlkit/rewrite/lec.hpp"

#ifndef RTLKIT_PROMPT_DIR
#define RTLKIT_PROMPT_DIR "share/rtlkit/prompts"
#endif

namespace rtlkit::cli {

// Each configurable key: its dotted name, default value, and an optional
// constraint returning a message when the value is rejected.
struct ConfigField {
    std::string key;
    ordered_json default_value;
    std::function<std::optional<std::string>(const json&)> check;
};

namespace detail {

inline std::function<std::optional<std::string>(const json&)> positive() {
    return [](const json& v) -> std::optional<std::string> {
        if (v.get<double>() > 0) return std::nullopt;
        return "must be > 0";
    };
}

inline std::function<std::optional<std::string>(const json&)> non_negative() {
    return [](const json& v) -> std::optional<std::string> {
        if (v.get<double>() >= 0) return std::nullopt;
        return "must be >= 0";
    };
}

inline std::string bound_text(double x) {
    return x == std::floor(x) ? std::to_string(static_cast<long long>(x)) : json(x).dump();
}

inline std::function<std::optional<std::string>(const json&)> in_range(double lo, double hi, bool open_lo = false) {
    return [=](const json& v) -> std::optional<std::string> {
        const double x = v.get<double>();
        if ((open_lo ? x > lo : x >= lo) && x <= hi) return std::nullopt;
        return std::string("must be in ") + (open_lo ? "(" : "[") + bound_text(lo) + ", " + bound_text(hi) + "]";
    };
}

inline std::function<std::optional<std::string>(const json&)> one_of(std::vector<std::string> allowed) {
    return [allowed](const json& v) -> std::optional<std::string> {
        for (const auto& a : allowed)
            if (v.get<std::string>() == a) return std::nullopt;
        std::string msg = "must be one of";
        for (const auto& a : allowed) msg += " '" + a + "'";
        return msg;
    };
}

inline std::function<std::optional<std::string>(const json&)> regex_text() {
    return [](const json& v) -> std::optional<std::string> {
        try {
            std::regex re(v.get<std::string>());
            if (!v.get<std::string>().empty()) return std::nullopt;
            return "must not be empty";
        } catch (const std::regex_error& e) {
            return std::string("is not a valid regular expression: ") + e.what();
        }
    };
}

inline std::function<std::optional<std::string>(const json&)> placeholders(std::vector<std::string> names,
                                                                          bool allow_empty) {
    return [=](const json& v) -> std::optional<std::string> {
        const auto s = v.get<std::string>();
        if (s.empty() && allow_empty) return std::nullopt;
        for (const auto& n : names)
            if (s.find("{" + n + "}") == std::string::npos) return "must contain the {" + n + "} placeholder";
        return std::nullopt;
    };
}

} // namespace detail

inline const std::vector<ConfigField>& config_schema() {
    using namespace detail;
    const rewrite::LecAdapterConfig lec;
    static const std::vector<ConfigField> fields{
        {"prompts_dir", RTLKIT_PROMPT_DIR, nullptr},
        {"corpus.max_comment_ratio", corpus::kDefaultMaxCommentRatio, in_range(0, 1, true)},
        {"corpus.num_hashes", corpus::kDefaultNumHashes, positive()},
        {"corpus.shingle_width", corpus::kDefaultShingleWidth, positive()},
        {"corpus.jaccard_threshold", corpus::kDefaultJaccardThreshold, in_range(0, 1, true)},
        {"corpus.syntax_command", "", placeholders({"file"}, true)},
        {"corpus.syntax_timeout", 30.0, positive()},
        {"chat.endpoint", "https://api.openai.com/v1/chat/completions", nullptr},
        {"chat.model", "gpt-4o", nullptr},
        {"chat.temperature", 0.0, in_range(0, 2)},
        {"chat.max_retries", 3, non_negative()},
        {"chat.timeout", 60.0, positive()},
        {"chat.backoff", 1.0, non_negative()},
        {"chat.api_key_env", "OPENAI_API_KEY", nullptr},
        {"annotate.query_word_cap", 60, positive()},
        {"annotate.leak_retries", 3, non_negative()},
        {"rewrite.rounds", 3, in_range(1, 5)},
        {"rewrite.benchmark_cap", 10, positive()},
        {"rewrite.lec_command", lec.command, placeholders({"golden", "gate"}, false)},
        {"rewrite.lec_timeout", lec.timeout_seconds, positive()},
        {"rewrite.equivalent_pattern", lec.equivalent_pattern, regex_text()},
        {"rewrite.inequivalent_pattern", lec.inequivalent_pattern, regex_text()},
        {"embed.backend", "toy", one_of({"toy", "http"})},
        {"embed.endpoint", "https://api.openai.com/v1/embeddings", nullptr},
        {"embed.model", "text-embedding-3-small", nullptr},
        {"embed.batch_size", 64, positive()},
        {"embed.timeout", 60.0, positive()},
        {"embed.max_retries", 3, non_negative()},
        {"embed.toy_dim", 64, positive()},
        {"embed.toy_features", 2048, positive()},
        {"embed.toy_vocab", 1024, positive()},
        {"eval.k", ordered_json::array({1, 5, 10}), nullptr},
        {"perf.num_trees", 200, positive()},
        {"perf.max_depth", 4, in_range(0, 16)},
        {"perf.shrinkage", 0.1, in_range(0, 1, true)},
        {"perf.min_leaf", 5, positive()},
    };
    return fields;
}

struct ConfigResult {
    ordered_json config;  // defaults merged with the input
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }
};

namespace detail {

inline bool same_kind(const ordered_json& def, const json& v) {
    if (def.is_number_integer()) return v.is_number_integer() || (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()));
    if (def.is_number()) return v.is_number();
    if (def.is_string()) return v.is_string();
    if (def.is_array()) return v.is_array();
    if (def.is_boolean()) return v.is_boolean();
    return false;
}

inline std::string kind_name(const ordered_json& def) {
    if (def.is_number_integer()) return "an integer";
    if (def.is_number()) return "a number";
    if (def.is_string()) return "a string";
    if (def.is_array()) return "an array";
    return "a boolean";
}

inline void set_dotted(ordered_json& root, const std::string& key, const ordered_json& value) {
    ordered_json* cur = &root;
    std::size_t start = 0;
    for (auto dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
        cur = &(*cur)[key.substr(start, dot - start)];
        start = dot + 1;
    }
    (*cur)[key.substr(start)] = value;
}

inline void collect_leaves(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) collect_leaves(*it, key, out);
        else out.emplace_back(key, *it);
    }
}

} // namespace detail

/// Applies defaults, rejects unknown keys and checks every value, reporting
/// all problems in one pass. Keys are reported in dotted form.
inline ConfigResult validate_config(const json& input) {
    ConfigResult r;
    const auto& schema = config_schema();
    for (const auto& f : schema) detail::set_dotted(r.config, f.key, f.default_value);
    if (!input.is_object()) {
        r.errors.push_back("config root must be a JSON object");
        return r;
    }
    std::vector<std::pair<std::string, json>> leaves;
    detail::collect_leaves(input, "", leaves);
    for (const auto& [key, value] : leaves) {
        const ConfigField* field = nullptr;
        for (const auto& f : schema)
            if (f.key == key) field = &f;
        if (!field) {
            r.errors.push_back(key + ": unknown key");
            continue;
        }
        if (!detail::same_kind(field->default_value, value)) {
            r.errors.push_back(key + ": must be " + detail::kind_name(field->default_value));
            continue;
        }
        if (field->check)
            if (auto msg = field->check(value)) {
                r.errors.push_back(key + ": " + *msg);
                continue;
            }
        ordered_json v = ordered_json::parse(value.dump());
        if (field->default_value.is_number_integer() && v.is_number_float()) v = static_cast<long long>(v.get<double>());
        detail::set_dotted(r.config, key, v);
    }
    const auto& k = r.config["eval"]["k"];
    if (k.empty()) r.errors.push_back("eval.k: must not be empty");
    for (const auto& e : k)
        if (!e.is_number_integer() || e.get<long long>() < 1) {
            r.errors.push_back("eval.k: entries must be positive integers");
            break;
        }
    return r;
}

/// Reads and validates a config file. An unreadable file is an I/O error;
/// malformed JSON is reported like any other config problem.
inline ConfigResult load_config(const std::filesystem::path& path) {
    const auto text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        ConfigResult r = validate_config(json::object());
        r.errors.push_back(path.string() + ": " + e.what());
        return r;
    }
    return validate_config(j);
}

} // namespace rtlkit::cli
