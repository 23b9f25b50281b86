#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rtlkit/corpus/lexer.hpp"

namespace rtlkit::corpus {

/// Names a module declares: the module itself, ports, nets, variables,
/// parameters, functions and tasks.
inline std::set<std::string> declared_identifiers(std::string_view src) {
    static const std::set<std::string_view> decl_keywords = {
        "input", "output", "inout", "wire", "reg", "logic", "tri", "wand", "wor",
        "integer", "real", "realtime", "time", "event", "genvar", "parameter",
        "localparam", "supply0", "supply1", "tri0", "tri1", "triand", "trior", "bit", "byte",
        "int", "shortint", "longint",
    };
    static const std::set<std::string_view> modifiers = {
        "wire", "reg", "logic", "signed", "unsigned", "integer", "real", "var", "tri",
        "vectored", "scalared", "bit", "byte", "int", "automatic", "static", "const",
    };

    std::vector<Token> code;
    for (const auto& t : lex(src))
        if (!t.is_comment()) code.push_back(t);

    std::set<std::string> names;
    auto text = [&](std::size_t i) { return code[i].text(src); };
    auto skip_brackets = [&](std::size_t& i) {
        while (i < code.size() && text(i) == "[") {
            int depth = 0;
            for (; i < code.size(); ++i) {
                if (text(i) == "[") ++depth;
                else if (text(i) == "]" && --depth == 0) {
                    ++i;
                    break;
                }
            }
        }
    };

    for (std::size_t i = 0; i < code.size(); ++i) {
        auto w = text(i);
        if (code[i].kind != TokenKind::Identifier) continue;
        if (w == "module" || w == "macromodule" || w == "function" || w == "task") {
            std::size_t k = i + 1;
            while (k < code.size() && (modifiers.count(text(k)) || text(k) == "[")) {
                if (text(k) == "[") skip_brackets(k);
                else ++k;
            }
            if (k < code.size() && code[k].kind == TokenKind::Identifier) {
                // `function [7:0] f` vs `function integer f`: the name is the last identifier before '(' or ';'
                std::size_t name = k;
                while (name + 1 < code.size() && code[name + 1].kind == TokenKind::Identifier) ++name;
                names.emplace(text(name));
                // header port list: identifiers directly followed by ',' or ')' at depth 1
                std::size_t p = name + 1;
                if ((w == "module" || w == "macromodule") && p < code.size() && text(p) == "#") {
                    int depth = 0;
                    for (++p; p < code.size(); ++p) {
                        if (text(p) == "(") ++depth;
                        else if (text(p) == ")" && --depth == 0) {
                            ++p;
                            break;
                        }
                    }
                }
                if (p < code.size() && text(p) == "(") {
                    int depth = 0;
                    for (; p < code.size(); ++p) {
                        auto t = text(p);
                        if (t == "(" || t == "[" || t == "{") ++depth;
                        else if (t == ")" || t == "]" || t == "}") {
                            if (--depth == 0) break;
                        } else if (depth == 1 && code[p].kind == TokenKind::Identifier &&
                                   p + 1 < code.size() &&
                                   (text(p + 1) == "," || text(p + 1) == ")")) {
                            names.emplace(t);
                        }
                    }
                }
            }
            continue;
        }
        if (!decl_keywords.count(w)) continue;
        std::size_t k = i + 1;
        for (;;) {
            while (k < code.size() && (modifiers.count(text(k)) || text(k) == "[" || decl_keywords.count(text(k)))) {
                if (text(k) == "[") skip_brackets(k);
                else ++k;
            }
            if (k >= code.size() || code[k].kind != TokenKind::Identifier) break;
            // a user-defined type name followed by the declared name
            if (k + 1 < code.size() && code[k + 1].kind == TokenKind::Identifier &&
                !decl_keywords.count(text(k + 1)))
                ++k;
            names.emplace(text(k));
            ++k;
            skip_brackets(k);  // unpacked dimensions
            if (k < code.size() && text(k) == "=") {
                int depth = 0;
                for (; k < code.size(); ++k) {
                    auto t = text(k);
                    if (t == "(" || t == "[" || t == "{") ++depth;
                    else if (t == ")" || t == "]" || t == "}") {
                        if (depth == 0) break;
                        --depth;
                    } else if ((t == "," || t == ";") && depth == 0) {
                        break;
                    }
                }
            }
            if (k < code.size() && text(k) == ",") {
                ++k;
                // `input a, output b`: the next declaration keyword restarts the outer loop
                if (k < code.size() && decl_keywords.count(text(k))) break;
                continue;
            }
            break;
        }
    }
    return names;
}

} // namespace rtlkit::corpus
