#pragma once

#include <optional>
#include <string>
#include <utility>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/hash.hpp"
#include "rtlkit/common/io.hpp"
#include "rtlkit/common/text.hpp"
#include "rtlkit/corpus/lexer.hpp"

namespace rtlkit::corpus {

struct LineSpan {
    std::size_t start = 0;  // 1-based, inclusive
    std::size_t end = 0;
    bool operator==(const LineSpan&) const = default;
};

struct SyntaxVerdict {
    bool valid = true;
    std::string diagnostic;
    bool operator==(const SyntaxVerdict&) const = default;
};

struct VerilogModule {
    std::string id;
    std::string source_text;
    std::string origin_path;
    LineSpan line_span;
    std::size_t total_lines = 0;
    std::size_t comment_lines = 0;
    double comment_ratio = 0.0;
    bool structurally_complete = false;
    std::optional<SyntaxVerdict> syntax;

    bool operator==(const VerilogModule&) const = default;
};

inline std::string module_id_for(std::string_view source_text) {
    return content_id128(text::normalize_trailing_whitespace(source_text));
}

/// True iff the text holds exactly one `module` and one later `endmodule`
/// outside comments and strings.
inline bool is_structurally_complete(std::string_view source_text) {
    std::size_t modules = 0, ends = 0, module_pos = 0, end_pos = 0;
    for (const auto& t : lex(source_text)) {
        if (t.kind != TokenKind::Identifier) continue;
        auto word = t.text(source_text);
        if (word == "module" || word == "macromodule") {
            ++modules;
            module_pos = t.offset;
        } else if (word == "endmodule") {
            ++ends;
            end_pos = t.offset;
        }
    }
    return modules == 1 && ends == 1 && module_pos < end_pos;
}

inline ordered_json to_json(const VerilogModule& m) {
    ordered_json j;
    j["id"] = m.id;
    j["origin_path"] = m.origin_path;
    j["line_span"] = {m.line_span.start, m.line_span.end};
    j["total_lines"] = m.total_lines;
    j["comment_lines"] = m.comment_lines;
    j["comment_ratio"] = m.comment_ratio;
    j["structurally_complete"] = m.structurally_complete;
    if (m.syntax) {
        j["syntax_valid"] = m.syntax->valid;
        j["syntax_diagnostic"] = m.syntax->diagnostic;
    } else {
        j["syntax_valid"] = nullptr;
        j["syntax_diagnostic"] = nullptr;
    }
    j["source_text"] = m.source_text;
    return j;
}

template <class Json>
VerilogModule module_from_json(const Json& j) {
    try {
        VerilogModule m;
        m.id = j.at("id").template get<std::string>();
        m.origin_path = j.at("origin_path").template get<std::string>();
        m.line_span = {j.at("line_span").at(0).template get<std::size_t>(),
                       j.at("line_span").at(1).template get<std::size_t>()};
        m.total_lines = j.at("total_lines").template get<std::size_t>();
        m.comment_lines = j.at("comment_lines").template get<std::size_t>();
        m.comment_ratio = j.at("comment_ratio").template get<double>();
        m.structurally_complete = j.at("structurally_complete").template get<bool>();
        if (j.contains("syntax_valid") && !j["syntax_valid"].is_null())
            m.syntax = SyntaxVerdict{j["syntax_valid"].template get<bool>(),
                                     j.value("syntax_diagnostic", std::string{})};
        m.source_text = j.at("source_text").template get<std::string>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("module record: ") + e.what());
    }
}

} // namespace rtlkit::corpus
