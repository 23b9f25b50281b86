#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtlkit/annotate/chat_client.hpp"
#include "rtlkit/annotate/prompts.hpp"
#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"
#include "rtlkit/common/text.hpp"
#include "rtlkit/corpus/declarations.hpp"
#include "rtlkit/corpus/lexer.hpp"
#include "rtlkit/corpus/module.hpp"

namespace rtlkit::annotate {

struct LineComment {
    std::size_t line = 0;  // 1-based, relative to the module source
    std::string text;
    bool operator==(const LineComment&) const = default;
};

/// Output of the annotation chain. Stages fill in order; a later stage is
/// only present when every earlier one is.
struct AnnotationRecord {
    std::string module_id;
    std::optional<std::vector<LineComment>> line_comments;
    std::optional<std::string> specification;
    std::optional<std::string> high_level_description;
    std::optional<std::string> user_query;

    bool chain_ordered() const {
        if (user_query && !high_level_description) return false;
        if (high_level_description && !specification) return false;
        if (specification && !line_comments) return false;
        return true;
    }
    bool complete() const { return user_query.has_value(); }
    bool operator==(const AnnotationRecord&) const = default;
};

struct AnnotateConfig {
    std::string model = "gpt-4o";
    double temperature = 0.0;
    std::size_t query_word_cap = 60;
    int leak_retries = 3;
    std::string functionality_marker = "Functionality:";
    std::string implementation_marker = "Implementation:";
};

// Template names expected in the prompt directory.
inline constexpr const char* kLinesTemplate = "annotate_lines";
inline constexpr const char* kSpecificationTemplate = "annotate_specification";
inline constexpr const char* kHighLevelTemplate = "annotate_high_level";
inline constexpr const char* kRephraseTemplate = "rephrase_query";
inline constexpr const char* kRephraseRetryTemplate = "rephrase_query_retry";

namespace detail {

inline std::string comment_body(std::string_view raw) {
    if (raw.starts_with("//")) raw.remove_prefix(2);
    else if (raw.starts_with("/*")) {
        raw.remove_prefix(2);
        if (raw.ends_with("*/")) raw.remove_suffix(2);
    }
    return std::string(text::trim(raw));
}

/// Comment texts keyed by the line of the code token they annotate: the code
/// on the same line, else the next code token, else the last one.
inline std::map<std::size_t, std::vector<std::string>> comments_by_code_line(
    std::string_view src, const std::vector<corpus::Token>& tokens,
    const std::vector<std::size_t>& code_line_of_index) {
    std::vector<const corpus::Token*> code;
    for (const auto& t : tokens)
        if (!t.is_comment()) code.push_back(&t);
    std::map<std::size_t, std::vector<std::string>> out;
    for (const auto& t : tokens) {
        if (!t.is_comment()) continue;
        std::ptrdiff_t target = -1;
        for (std::size_t i = 0; i < code.size(); ++i)
            if (code[i]->line == t.line) {
                target = static_cast<std::ptrdiff_t>(i);
                break;
            }
        if (target < 0) {
            auto it = std::find_if(code.begin(), code.end(),
                                   [&](const corpus::Token* c) { return c->offset > t.offset; });
            if (it != code.end()) target = it - code.begin();
            else if (!code.empty()) target = static_cast<std::ptrdiff_t>(code.size()) - 1;
        }
        if (target < 0) continue;
        auto body = comment_body(t.text(src));
        if (!body.empty()) out[code_line_of_index[static_cast<std::size_t>(target)]].push_back(body);
    }
    return out;
}

inline std::string format_comments(const std::vector<LineComment>& comments) {
    std::string out;
    for (const auto& c : comments) out += "line " + std::to_string(c.line) + ": " + c.text + "\n";
    return out;
}

inline std::size_t find_ignore_case(std::string_view hay, std::string_view needle) {
    auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    return it == hay.end() ? std::string_view::npos : static_cast<std::size_t>(it - hay.begin());
}

} // namespace detail

/// Diffs the client's commented copy of the module against the original and
/// returns the comments it added, keyed by module-relative line.
inline std::vector<LineComment> annotate_lines(const corpus::VerilogModule& module, ChatClient& client,
                                               const PromptLibrary& prompts, const AnnotateConfig& cfg) {
    const auto prompt = prompts.render(kLinesTemplate, std::map<std::string, std::string>{{"code", module.source_text}});
    const std::string response = text::strip_code_fence(client.complete(ChatRequest::user(cfg.model, prompt, cfg.temperature)));

    const auto original_tokens = corpus::lex(module.source_text);
    std::vector<corpus::Token> response_tokens;
    try {
        response_tokens = corpus::lex(response);
    } catch (const Error& e) {
        fail(ErrorKind::MalformedResponse, std::string("commented code does not lex: ") + e.what());
    }

    std::vector<std::size_t> original_line_of;  // by code-token index
    std::vector<std::string> original_code, response_code;
    for (const auto& t : original_tokens)
        if (!t.is_comment()) {
            original_code.emplace_back(t.text(module.source_text));
            original_line_of.push_back(t.line);
        }
    for (const auto& t : response_tokens)
        if (!t.is_comment()) response_code.emplace_back(t.text(response));
    if (original_code != response_code) {
        std::size_t i = 0;
        while (i < original_code.size() && i < response_code.size() && original_code[i] == response_code[i]) ++i;
        fail(ErrorKind::ContentDrift,
             module.id + ": commented code changes code token " + std::to_string(i) + " (" +
                 (i < original_code.size() ? original_code[i] : std::string("<end>")) + " -> " +
                 (i < response_code.size() ? response_code[i] : std::string("<end>")) + ")");
    }

    // code tokens correspond one-to-one, so response comments map onto original lines
    auto before = detail::comments_by_code_line(module.source_text, original_tokens, original_line_of);
    auto after = detail::comments_by_code_line(response, response_tokens, original_line_of);

    std::vector<LineComment> out;
    for (auto& [line, texts] : after) {
        auto existing = before[line];
        std::vector<std::string> added;
        for (auto& t : texts) {
            auto it = std::find(existing.begin(), existing.end(), t);
            if (it != existing.end()) existing.erase(it);
            else added.push_back(t);
        }
        if (!added.empty()) out.push_back({line, text::join(added, " ")});
    }
    return out;
}

/// Requires the functionality and implementation section markers, each followed by text.
inline std::string validate_specification(const std::string& response, const AnnotateConfig& cfg) {
    auto trimmed = std::string(text::trim(response));
    if (trimmed.empty()) fail(ErrorKind::MalformedResponse, "empty specification");
    const std::size_t f = detail::find_ignore_case(trimmed, cfg.functionality_marker);
    const std::size_t i = detail::find_ignore_case(trimmed, cfg.implementation_marker);
    if (f == std::string::npos)
        fail(ErrorKind::MalformedResponse, "specification lacks '" + cfg.functionality_marker + "' section");
    if (i == std::string::npos)
        fail(ErrorKind::MalformedResponse, "specification lacks '" + cfg.implementation_marker + "' section");
    auto section = [&](std::size_t start, std::size_t marker_len, std::size_t other) {
        std::size_t b = start + marker_len;
        std::size_t e = other > start ? other : trimmed.size();
        return text::trim(std::string_view(trimmed).substr(b, e - b));
    };
    if (section(f, cfg.functionality_marker.size(), i).empty() ||
        section(i, cfg.implementation_marker.size(), f).empty())
        fail(ErrorKind::MalformedResponse, "specification section is empty");
    return trimmed;
}

inline std::string annotate_specification(const corpus::VerilogModule& module,
                                          const std::vector<LineComment>& line_comments, ChatClient& client,
                                          const PromptLibrary& prompts, const AnnotateConfig& cfg) {
    const auto prompt = prompts.render(
        kSpecificationTemplate,
        std::map<std::string, std::string>{{"code", module.source_text}, {"comments", detail::format_comments(line_comments)}});
    return validate_specification(client.complete(ChatRequest::user(cfg.model, prompt, cfg.temperature)), cfg);
}

/// Sentence count: terminators [.!?] followed by whitespace or end of text.
inline std::size_t count_sentences(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return 0;
    std::size_t sentences = 0;
    bool content = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '.' || c == '!' || c == '?') {
            bool boundary = i + 1 == s.size() || text::is_space(s[i + 1]);
            if (boundary && content) {
                ++sentences;
                content = false;
            }
        } else if (!text::is_space(c)) {
            content = true;
        }
    }
    if (content) ++sentences;
    return sentences;
}

inline std::string validate_one_sentence(const std::string& response) {
    auto t = std::string(text::trim(response));
    if (t.empty()) fail(ErrorKind::MalformedResponse, "empty high-level description");
    if (count_sentences(t) != 1)
        fail(ErrorKind::MalformedResponse, "high-level description must be one sentence: " + t);
    return t;
}

inline std::string annotate_high_level(const corpus::VerilogModule& module, const std::string& specification,
                                       ChatClient& client, const PromptLibrary& prompts,
                                       const AnnotateConfig& cfg) {
    const auto prompt = prompts.render(
        kHighLevelTemplate,
        std::map<std::string, std::string>{{"code", module.source_text}, {"specification", specification}});
    return validate_one_sentence(client.complete(ChatRequest::user(cfg.model, prompt, cfg.temperature)));
}

/// 1-2 letter English words that may coincide with short identifiers.
inline bool is_exempt_short_word(const std::string& w) {
    static const std::set<std::string> words = {
        "a",  "i",  "am", "an", "as", "at", "be", "by", "do", "go", "he", "if", "in",
        "is", "it", "me", "my", "no", "of", "on", "or", "so", "to", "up", "us", "we",
    };
    if (w.size() >= 3) return false;
    std::string lower = w;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return words.count(lower) > 0;
}

/// Declared identifiers of the module that occur as whole words in `query`.
inline std::vector<std::string> leaked_identifiers(std::string_view query, const std::set<std::string>& declared) {
    std::set<std::string> found;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && declared.count(cur) && !is_exempt_short_word(cur)) found.insert(cur);
        cur.clear();
    };
    for (char c : query) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$') cur.push_back(c);
        else flush();
    }
    flush();
    return {found.begin(), found.end()};
}

inline std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        if (text::is_space(c)) in_word = false;
        else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

/// Rewrites the description as a user query free of the module's declared names.
/// Leaks are retried with the offending names appended to the prompt.
inline std::string rephrase_to_query(const std::string& high_level_description,
                                     const corpus::VerilogModule& module, ChatClient& client,
                                     const PromptLibrary& prompts, const AnnotateConfig& cfg) {
    const auto declared = corpus::declared_identifiers(module.source_text);
    std::map<std::string, std::string> values{{"description", high_level_description}};
    std::string prompt = prompts.render(kRephraseTemplate, values);
    std::vector<std::string> leaks;
    for (int attempt = 0; attempt <= cfg.leak_retries; ++attempt) {
        auto query = std::string(text::trim(client.complete(ChatRequest::user(cfg.model, prompt, cfg.temperature))));
        if (query.empty()) fail(ErrorKind::MalformedResponse, module.id + ": empty user query");
        if (word_count(query) > cfg.query_word_cap)
            fail(ErrorKind::MalformedResponse, module.id + ": user query exceeds " +
                                                   std::to_string(cfg.query_word_cap) + " words");
        leaks = leaked_identifiers(query, declared);
        if (leaks.empty()) return query;
        values["violations"] = text::join(leaks, ", ");
        values["previous"] = query;
        prompt = prompts.render(kRephraseTemplate, values) + prompts.render(kRephraseRetryTemplate, values);
    }
    fail(ErrorKind::QueryLeak, module.id + ": user query still names identifiers: " + text::join(leaks, ", "));
}

/// Runs only the stages missing from `record`; earlier stages are reused as-is.
/// On a stage error the record keeps whatever stages completed and the error propagates.
inline void annotate_record(const corpus::VerilogModule& module, AnnotationRecord& record, ChatClient& client,
                            const PromptLibrary& prompts, const AnnotateConfig& cfg) {
    record.module_id = module.id;
    require(record.chain_ordered(), ErrorKind::InvalidInput, module.id + ": annotation stages out of order");
    if (!record.line_comments) record.line_comments = annotate_lines(module, client, prompts, cfg);
    if (!record.specification)
        record.specification = annotate_specification(module, *record.line_comments, client, prompts, cfg);
    if (!record.high_level_description)
        record.high_level_description = annotate_high_level(module, *record.specification, client, prompts, cfg);
    if (!record.user_query)
        record.user_query = rephrase_to_query(*record.high_level_description, module, client, prompts, cfg);
}

inline ordered_json to_json(const AnnotationRecord& r) {
    ordered_json j;
    j["module_id"] = r.module_id;
    if (r.line_comments) {
        ordered_json arr = ordered_json::array();
        for (const auto& c : *r.line_comments) arr.push_back({c.line, c.text});
        j["line_comments"] = arr;
    } else {
        j["line_comments"] = nullptr;
    }
    j["specification"] = r.specification ? ordered_json(*r.specification) : ordered_json(nullptr);
    j["high_level_description"] =
        r.high_level_description ? ordered_json(*r.high_level_description) : ordered_json(nullptr);
    j["user_query"] = r.user_query ? ordered_json(*r.user_query) : ordered_json(nullptr);
    return j;
}

template <class Json>
AnnotationRecord annotation_from_json(const Json& j) {
    try {
        AnnotationRecord r;
        r.module_id = j.at("module_id").template get<std::string>();
        if (j.contains("line_comments") && !j["line_comments"].is_null()) {
            std::vector<LineComment> cs;
            for (const auto& c : j["line_comments"])
                cs.push_back({c.at(0).template get<std::size_t>(), c.at(1).template get<std::string>()});
            r.line_comments = std::move(cs);
        }
        auto opt = [&](const char* key) -> std::optional<std::string> {
            if (!j.contains(key) || j[key].is_null()) return std::nullopt;
            return j[key].template get<std::string>();
        };
        r.specification = opt("specification");
        r.high_level_description = opt("high_level_description");
        r.user_query = opt("user_query");
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("annotation record: ") + e.what());
    }
}

/// Folds an append-only annotations file: later lines for a module supersede earlier ones.
inline std::map<std::string, AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    std::map<std::string, AnnotationRecord> out;
    if (!std::filesystem::exists(path)) return out;
    for (const auto& row : read_jsonl(path)) {
        auto r = annotation_from_json(row);
        out[r.module_id] = std::move(r);
    }
    return out;
}

} // namespace rtlkit::annotate
