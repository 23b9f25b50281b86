#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "rtlkit/corpus/lexer.hpp"
#include "rtlkit/corpus/module.hpp"

namespace rtlkit::corpus {

namespace detail {

struct Interval {
    std::size_t begin, end;  // [begin, end)
    bool block;
};

inline VerilogModule make_module(std::string_view src, std::size_t begin, std::size_t end,
                                 const std::vector<Token>& tokens, std::string_view origin) {
    VerilogModule m;
    m.source_text = std::string(src.substr(begin, end - begin));
    m.origin_path = std::string(origin);
    m.id = module_id_for(m.source_text);
    m.line_span.start = 1 + static_cast<std::size_t>(std::count(src.begin(), src.begin() + begin, '\n'));
    m.line_span.end = m.line_span.start +
                      static_cast<std::size_t>(std::count(src.begin() + begin, src.begin() + end, '\n'));

    std::vector<Interval> comments;
    for (const auto& t : tokens)
        if (t.is_comment() && t.offset + t.length > begin && t.offset < end)
            comments.push_back({t.offset, t.offset + t.length, t.kind == TokenKind::BlockComment});

    auto in_comment = [&](std::size_t pos, bool strictly_inside_block) {
        for (const auto& c : comments) {
            if (strictly_inside_block) {
                if (c.block && c.begin < pos && pos < c.end) return true;
            } else if (c.begin <= pos && pos < c.end) {
                return true;
            }
        }
        return false;
    };

    std::size_t line_begin = begin;
    for (;;) {
        std::size_t line_end = src.find('\n', line_begin);
        if (line_end == std::string_view::npos || line_end > end) line_end = end;
        std::size_t p = line_begin;
        while (p < line_end && text::is_space(src[p])) ++p;
        bool is_comment = p < line_end ? in_comment(p, false) : in_comment(line_begin, true);
        ++m.total_lines;
        if (is_comment) ++m.comment_lines;
        if (line_end >= end) break;
        line_begin = line_end + 1;
    }
    m.comment_ratio = m.total_lines == 0
                          ? 0.0
                          : static_cast<double>(m.comment_lines) / static_cast<double>(m.total_lines);
    m.structurally_complete = is_structurally_complete(m.source_text);
    return m;
}

} // namespace detail

/// Splits a Verilog file into top-level module spans.
///
/// Each span runs from the `module` keyword to the end of its `endmodule`.
/// A `module` that is still open when another `module` or end of input is
/// reached is emitted as an incomplete span ending at the last token before
/// that point. Keywords inside comments and strings are ignored.
inline std::vector<VerilogModule> segment_file(std::string_view file_text,
                                               std::string_view origin_path) {
    const auto tokens = lex(file_text);
    std::vector<VerilogModule> out;
    bool open = false;
    std::size_t open_begin = 0;
    std::size_t last_end = 0;  // end offset of the last token seen

    for (const auto& t : tokens) {
        if (t.kind == TokenKind::Identifier) {
            auto word = t.text(file_text);
            if (word == "module" || word == "macromodule") {
                if (open) out.push_back(detail::make_module(file_text, open_begin, last_end, tokens, origin_path));
                open = true;
                open_begin = t.offset;
            } else if (word == "endmodule") {
                if (!open)
                    fail(ErrorKind::ParseError, std::string(origin_path) + ":" +
                                                    std::to_string(t.line) +
                                                    ": endmodule without open module");
                out.push_back(detail::make_module(file_text, open_begin, t.offset + t.length,
                                                  tokens, origin_path));
                open = false;
            }
        }
        last_end = t.offset + t.length;
    }
    if (open) out.push_back(detail::make_module(file_text, open_begin, last_end, tokens, origin_path));
    return out;
}

} // namespace rtlkit::corpus
