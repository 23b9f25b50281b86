#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace rtlkit::text {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

inline std::string_view rtrim(std::string_view s) {
    std::size_t e = s.size();
    while (e > 0 && is_space(s[e - 1])) --e;
    return s.substr(0, e);
}

/// Splits on '\n'. A trailing newline does not produce an empty last line.
inline std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < s.size()) {
        auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(s.substr(start));
            break;
        }
        lines.push_back(s.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

/// Strips trailing whitespace from every line; used before content hashing.
inline std::string normalize_trailing_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    auto lines = split_lines(s);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out.append(rtrim(lines[i]));
        if (i + 1 < lines.size() || (!s.empty() && s.back() == '\n')) out.push_back('\n');
    }
    return out;
}

/// Lowercased word tokens; whitespace and ASCII punctuation are separators.
/// Non-ASCII bytes are kept inside words.
inline std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && (std::isspace(c) || std::ispunct(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

/// Replaces every `{key}` with its value. Braces not naming a key are left alone,
/// so Verilog concatenations inside substituted text survive untouched.
template <class Map>
std::string render(std::string_view tmpl, const Map& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string key(tmpl.substr(i + 1, close - i - 1));
                auto it = values.find(key);
                if (it != values.end()) {
                    out.append(it->second);
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

/// Removes a surrounding Markdown code fence if the response is wrapped in one.
inline std::string strip_code_fence(std::string_view s) {
    auto t = trim(s);
    if (t.substr(0, 3) != "```") return std::string(s);
    auto first_nl = t.find('\n');
    if (first_nl == std::string_view::npos) return std::string(s);
    auto body = t.substr(first_nl + 1);
    auto last = body.rfind("```");
    if (last == std::string_view::npos) return std::string(s);
    body = body.substr(0, last);
    return std::string(body);
}

} // namespace rtlkit::text
