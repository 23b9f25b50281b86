#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "rtlkit/common/error.hpp"

namespace rtlkit::corpus {

enum class TokenKind { Identifier, Number, String, Punct, Directive, LineComment, BlockComment };

struct Token {
    TokenKind kind;
    std::size_t offset;  // byte offset of the first character
    std::size_t length;
    std::size_t line;    // 1-based line of the first character
    std::size_t end_line;

    std::string_view text(std::string_view source) const { return source.substr(offset, length); }
    bool is_comment() const {
        return kind == TokenKind::LineComment || kind == TokenKind::BlockComment;
    }
};

/// Lexes Verilog source into tokens, comments included.
///
/// Only as much of the language as module-boundary detection, shingling and
/// declaration scanning need: identifiers (plain and escaped), sized/based
/// numbers, strings, compiler directives and single-character punctuation.
/// Unterminated block comments and strings raise ParseError naming the line.
inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> tokens;
    std::size_t i = 0, line = 1;
    const std::size_t n = src.size();

    auto is_ident_start = [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    };
    auto is_ident_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    };

    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        const std::size_t start = i, start_line = line;
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            tokens.push_back({TokenKind::LineComment, start, i - start, start_line, start_line});
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            bool closed = false;
            while (i < n) {
                if (src[i] == '*' && i + 1 < n && src[i + 1] == '/') {
                    i += 2;
                    closed = true;
                    break;
                }
                if (src[i] == '\n') ++line;
                ++i;
            }
            if (!closed)
                fail(ErrorKind::ParseError,
                     "unterminated block comment starting at line " + std::to_string(start_line));
            tokens.push_back({TokenKind::BlockComment, start, i - start, start_line, line});
            continue;
        }
        if (c == '"') {
            ++i;
            bool closed = false;
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n && src[i + 1] != '\n') {
                    i += 2;
                    continue;
                }
                if (src[i] == '"') {
                    ++i;
                    closed = true;
                    break;
                }
                if (src[i] == '\n') break;
                ++i;
            }
            if (!closed)
                fail(ErrorKind::ParseError,
                     "unterminated string literal at line " + std::to_string(start_line));
            tokens.push_back({TokenKind::String, start, i - start, start_line, start_line});
            continue;
        }
        if (c == '\\') {
            // escaped identifier runs to the next whitespace
            ++i;
            while (i < n && !std::isspace(static_cast<unsigned char>(src[i]))) ++i;
            tokens.push_back({TokenKind::Identifier, start, i - start, start_line, start_line});
            continue;
        }
        if (c == '`') {
            ++i;
            while (i < n && is_ident_char(src[i])) ++i;
            tokens.push_back({TokenKind::Directive, start, i - start, start_line, start_line});
            continue;
        }
        if (is_ident_start(c) || c == '$') {
            ++i;
            while (i < n && is_ident_char(src[i])) ++i;
            tokens.push_back({TokenKind::Identifier, start, i - start, start_line, start_line});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '\'' && i + 1 < n &&
             std::string_view("bBoOdDhHsS").find(src[i + 1]) != std::string_view::npos)) {
            // 12, 4'b1010, 'hFF, 8'sd3, 1.5e3
            ++i;
            while (i < n) {
                char d = src[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.' ||
                    d == '?') {
                    ++i;
                } else if (d == '\'' && i + 1 < n &&
                           std::string_view("bBoOdDhHsS").find(src[i + 1]) !=
                               std::string_view::npos) {
                    i += 2;
                } else {
                    break;
                }
            }
            tokens.push_back({TokenKind::Number, start, i - start, start_line, start_line});
            continue;
        }
        ++i;
        tokens.push_back({TokenKind::Punct, start, 1, start_line, start_line});
    }
    return tokens;
}

/// Token texts with comments removed.
inline std::vector<std::string> code_tokens(std::string_view src) {
    std::vector<std::string> out;
    for (const auto& t : lex(src))
        if (!t.is_comment()) out.emplace_back(t.text(src));
    return out;
}

inline bool is_keyword_token(const Token& t, std::string_view src, std::string_view kw) {
    return t.kind == TokenKind::Identifier && t.text(src) == kw;
}

} // namespace rtlkit::corpus
