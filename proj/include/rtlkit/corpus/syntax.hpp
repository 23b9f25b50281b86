#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unistd.h>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"
#include "rtlkit/common/subprocess.hpp"
#include "rtlkit/corpus/lexer.hpp"
#include "rtlkit/corpus/module.hpp"

namespace rtlkit::corpus {

class SyntaxChecker {
public:
    virtual ~SyntaxChecker() = default;
    /// Infrastructure problems throw; syntax problems come back as an invalid verdict.
    virtual SyntaxVerdict check(const VerilogModule& module) const = 0;
};

/// Structural validator: bracket balance, block keyword pairing and the
/// shape of the module header. Not a Verilog parser.
class BuiltinSyntaxChecker final : public SyntaxChecker {
public:
    SyntaxVerdict check(const VerilogModule& module) const override {
        return check_text(module.source_text);
    }

    static SyntaxVerdict check_text(std::string_view src) {
        std::vector<Token> tokens;
        try {
            tokens = lex(src);
        } catch (const Error& e) {
            return {false, e.what()};
        }
        std::vector<Token> code;
        for (const auto& t : tokens)
            if (!t.is_comment()) code.push_back(t);

        if (auto diag = check_header(src, code); !diag.empty()) return {false, diag};

        static const std::map<std::string_view, std::string_view> closers = {
            {"end", "begin"},           {"endcase", "case"},         {"join", "fork"},
            {"join_any", "fork"},       {"join_none", "fork"},       {"endfunction", "function"},
            {"endtask", "task"},        {"endgenerate", "generate"}, {"endmodule", "module"},
            {"endspecify", "specify"},  {"endprimitive", "primitive"}, {"endtable", "table"},
        };
        static const std::map<std::string_view, std::string_view> openers = {
            {"begin", "begin"}, {"case", "case"},         {"casex", "case"},
            {"casez", "case"},  {"fork", "fork"},         {"function", "function"},
            {"task", "task"},   {"generate", "generate"}, {"module", "module"},
            {"macromodule", "module"}, {"specify", "specify"}, {"primitive", "primitive"},
            {"table", "table"},
        };

        struct Open {
            std::string what;
            std::size_t line;
        };
        std::vector<Open> stack;
        for (std::size_t i = 0; i < code.size(); ++i) {
            const auto& t = code[i];
            auto word = t.text(src);
            if (t.kind == TokenKind::Punct) {
                char c = word[0];
                if (c == '(' || c == '[' || c == '{') {
                    stack.push_back({std::string(1, c), t.line});
                } else if (c == ')' || c == ']' || c == '}') {
                    const char want = c == ')' ? '(' : c == ']' ? '[' : '{';
                    if (stack.empty() || stack.back().what != std::string(1, want))
                        return {false, "line " + std::to_string(t.line) + ": unbalanced '" +
                                           std::string(word) + "'"};
                    stack.pop_back();
                }
                continue;
            }
            if (t.kind != TokenKind::Identifier) continue;
            // `wait fork` / `disable fork` are statements, not blocks
            if (word == "fork" && i > 0 &&
                (code[i - 1].text(src) == "wait" || code[i - 1].text(src) == "disable"))
                continue;
            if (auto it = openers.find(word); it != openers.end()) {
                stack.push_back({std::string(it->second), t.line});
            } else if (auto ct = closers.find(word); ct != closers.end()) {
                if (stack.empty() || stack.back().what != ct->second)
                    return {false, "line " + std::to_string(t.line) + ": '" + std::string(word) +
                                       "' does not close an open '" + std::string(ct->second) + "'"};
                stack.pop_back();
            }
        }
        if (!stack.empty())
            return {false, "line " + std::to_string(stack.back().line) + ": unclosed '" +
                               stack.back().what + "'"};
        return {true, ""};
    }

private:
    // module NAME [#( ... )] [( ... )] ;
    static std::string check_header(std::string_view src, const std::vector<Token>& code) {
        std::size_t i = 0;
        while (i < code.size() && code[i].kind == TokenKind::Punct && code[i].text(src) == "(") {
            // (* attribute *) prefix
            while (i < code.size() && code[i].text(src) != ")") ++i;
            ++i;
        }
        if (i >= code.size() || (code[i].text(src) != "module" && code[i].text(src) != "macromodule"))
            return "module header: expected 'module'";
        const std::size_t header_line = code[i].line;
        ++i;
        if (i < code.size() && (code[i].text(src) == "automatic" || code[i].text(src) == "static")) ++i;
        if (i >= code.size() || code[i].kind != TokenKind::Identifier)
            return "line " + std::to_string(header_line) + ": module header: expected module name";
        ++i;
        auto skip_group = [&](std::size_t& k) -> bool {
            int depth = 0;
            for (; k < code.size(); ++k) {
                auto w = code[k].text(src);
                if (w == "(") ++depth;
                else if (w == ")" && --depth == 0) {
                    ++k;
                    return true;
                }
            }
            return false;
        };
        if (i < code.size() && code[i].text(src) == "#") {
            ++i;
            if (i >= code.size() || code[i].text(src) != "(" || !skip_group(i))
                return "line " + std::to_string(header_line) + ": module header: malformed parameter list";
        }
        if (i < code.size() && code[i].text(src) == "(") {
            if (!skip_group(i))
                return "line " + std::to_string(header_line) + ": module header: unterminated port list";
        }
        if (i >= code.size() || code[i].text(src) != ";")
            return "line " + std::to_string(header_line) + ": module header: expected ';'";
        return {};
    }
};

/// Runs an external checker given as a shell command template with a `{file}`
/// placeholder. Nonzero exit means Invalid; the captured output is the diagnostic.
class ExternalSyntaxChecker final : public SyntaxChecker {
public:
    ExternalSyntaxChecker(std::string command_template, double timeout_seconds)
        : command_template_(std::move(command_template)), timeout_(timeout_seconds) {
        require(timeout_ > 0, ErrorKind::Precondition, "syntax checker timeout must be > 0");
    }

    SyntaxVerdict check(const VerilogModule& module) const override {
        auto dir = std::filesystem::temp_directory_path() /
                   ("rtlkit-syntax-" + std::to_string(::getpid()));
        auto file = dir / (module.id + ".v");
        write_file(file, module.source_text);
        ProcessResult r;
        try {
            r = run_shell(expand_command(command_template_, {{"file", file.string()}}), timeout_);
        } catch (...) {
            std::error_code ec;
            std::filesystem::remove(file, ec);
            throw;
        }
        std::error_code ec;
        std::filesystem::remove(file, ec);
        if (r.exit_code != 0) return {false, r.out};
        return {true, ""};
    }

private:
    std::string command_template_;
    double timeout_;
};

inline SyntaxVerdict syntax_check(VerilogModule& module, const SyntaxChecker& checker) {
    module.syntax = checker.check(module);
    return *module.syntax;
}

} // namespace rtlkit::corpus
