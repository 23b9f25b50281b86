#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <regex>
#include <string>
#include <thread>
#include <unistd.h>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"
#include "rtlkit/common/subprocess.hpp"
#include "rtlkit/common/transcript.hpp"

namespace rtlkit::rewrite {

enum class Verdict { Equivalent, Inequivalent, SyntaxError };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::Equivalent: return "Equivalent";
    case Verdict::Inequivalent: return "Inequivalent";
    case Verdict::SyntaxError: return "SyntaxError";
    }
    return "?";
}

inline Verdict verdict_from_string(std::string_view s) {
    if (s == "Equivalent") return Verdict::Equivalent;
    if (s == "Inequivalent") return Verdict::Inequivalent;
    if (s == "SyntaxError") return Verdict::SyntaxError;
    fail(ErrorKind::ParseError, "unknown verdict: " + std::string(s));
}

/// Default driver script for Yosys' equivalence passes. `{golden}` and `{gate}`
/// are replaced by shell-quoted file paths.
inline constexpr const char* kDefaultLecCommand =
    "yosys -p \"read_verilog {golden}; hierarchy -auto-top; rename -top gold; design -stash gold; "
    "read_verilog {gate}; hierarchy -auto-top; rename -top gate; design -stash gate; "
    "design -copy-from gold -as gold gold; design -copy-from gate -as gate gate; "
    "equiv_make gold gate equiv; hierarchy -top equiv; proc; opt_clean; "
    "equiv_simple -seq 5; equiv_induct -seq 5; equiv_status -assert\"";

struct LecAdapterConfig {
    std::string command = kDefaultLecCommand;
    double timeout_seconds = 120.0;
    std::string equivalent_pattern = "Equivalence successfully proven";
    std::string inequivalent_pattern = "Found [0-9]+ unproven \\$equiv cells in 'equiv_status -assert'";

    void validate() const {
        require(!command.empty(), ErrorKind::Precondition, "lec.command must not be empty");
        require(command.find("{golden}") != std::string::npos && command.find("{gate}") != std::string::npos,
                ErrorKind::Precondition, "lec.command must contain {golden} and {gate}");
        require(timeout_seconds > 0, ErrorKind::Precondition, "lec.timeout must be > 0");
        require(!equivalent_pattern.empty() && !inequivalent_pattern.empty(), ErrorKind::Precondition,
                "lec verdict patterns must be non-empty");
        compile(equivalent_pattern);
        compile(inequivalent_pattern);
    }

    /// Checks that each reference output matches at most one pattern.
    void validate_against(const std::map<std::string, std::string>& reference_outputs) const {
        validate();
        auto eq = compile(equivalent_pattern);
        auto ineq = compile(inequivalent_pattern);
        for (const auto& [name, text] : reference_outputs)
            require(!(std::regex_search(text, eq) && std::regex_search(text, ineq)), ErrorKind::Precondition,
                    "lec verdict patterns overlap on reference output " + name);
    }

    static std::regex compile(const std::string& pattern) {
        try {
            return std::regex(pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            fail(ErrorKind::Precondition, "invalid lec pattern '" + pattern + "': " + e.what());
        }
    }
};

/// Equivalent beats Inequivalent beats a nonzero exit.
inline Verdict classify_lec_output(const std::string& output, int exit_code, const LecAdapterConfig& config) {
    if (std::regex_search(output, LecAdapterConfig::compile(config.equivalent_pattern))) return Verdict::Equivalent;
    if (std::regex_search(output, LecAdapterConfig::compile(config.inequivalent_pattern)))
        return Verdict::Inequivalent;
    if (exit_code != 0) return Verdict::SyntaxError;
    fail(ErrorKind::UnclassifiableOutput, "equivalence checker exited cleanly without a recognised verdict");
}

class LecChecker {
public:
    virtual ~LecChecker() = default;
    virtual Verdict check(const std::string& golden, const std::string& gate) = 0;
};

class FunctionLecChecker final : public LecChecker {
public:
    explicit FunctionLecChecker(std::function<Verdict(const std::string&, const std::string&)> fn)
        : fn_(std::move(fn)) {}
    Verdict check(const std::string& golden, const std::string& gate) override { return fn_(golden, gate); }

private:
    std::function<Verdict(const std::string&, const std::string&)> fn_;
};

/// Runs the configured command on two temporary files.
class ExternalLecChecker final : public LecChecker {
public:
    explicit ExternalLecChecker(LecAdapterConfig config) : config_(std::move(config)) { config_.validate(); }

    Verdict check(const std::string& golden, const std::string& gate) override {
        static std::atomic<unsigned long> counter{0};
        auto dir = std::filesystem::temp_directory_path() /
                   ("rtlkit-lec-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        auto golden_path = dir / "golden.v";
        auto gate_path = dir / "gate.v";
        write_file(golden_path, golden);
        write_file(gate_path, gate);
        struct Cleanup {
            std::filesystem::path dir;
            ~Cleanup() {
                std::error_code ec;
                std::filesystem::remove_all(dir, ec);
            }
        } cleanup{dir};
        auto cmd = expand_command(config_.command, {{"golden", golden_path.string()}, {"gate", gate_path.string()}});
        auto r = run_shell(cmd, config_.timeout_seconds);
        return classify_lec_output(r.out, r.exit_code, config_);
    }

private:
    LecAdapterConfig config_;
};

inline json lec_request(const std::string& golden, const std::string& gate) {
    return {{"golden", golden}, {"gate", gate}};
}

class RecordingLecChecker final : public LecChecker {
public:
    RecordingLecChecker(LecChecker& inner, Transcript& transcript) : inner_(inner), transcript_(transcript) {}
    Verdict check(const std::string& golden, const std::string& gate) override {
        auto v = inner_.check(golden, gate);
        transcript_.record(lec_request(golden, gate), std::string(to_string(v)));
        return v;
    }

private:
    LecChecker& inner_;
    Transcript& transcript_;
};

class ReplayLecChecker final : public LecChecker {
public:
    explicit ReplayLecChecker(Transcript& transcript) : transcript_(transcript) {}
    Verdict check(const std::string& golden, const std::string& gate) override {
        auto r = transcript_.replay(lec_request(golden, gate));
        if (!r.is_string()) fail(ErrorKind::ParseError, "recorded lec verdict is not a string");
        return verdict_from_string(r.get<std::string>());
    }

private:
    Transcript& transcript_;
};

} // namespace rtlkit::rewrite
