#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "rtlkit/common/io.hpp"
#include "rtlkit/common/subprocess.hpp"
#include "rtlkit/corpus/segment.hpp"
#include "rtlkit/corpus/syntax.hpp"
#include "rtlkit/evalkit/passk.hpp"

namespace rtlkit::evalkit {

/// A generation problem with its external functional check.
/// `command` may use {design} (candidate file) and {problem} (problem id);
/// exit status 0 means the candidate passed.
struct TestbenchProblem {
    std::string problem_id;
    std::string command;
    double timeout_seconds = 60.0;
};

/// Checks each candidate for syntax, then runs the functional check only on
/// candidates that parsed. Timeouts count as functional failures.
inline TrialRecord run_trials(const TestbenchProblem& problem, const std::vector<std::string>& candidates,
                              const corpus::SyntaxChecker& syntax) {
    static std::atomic<unsigned long> counter{0};
    std::vector<TrialFlags> flags;
    for (const auto& code : candidates) {
        TrialFlags f;
        std::vector<corpus::VerilogModule> mods;
        try {
            mods = corpus::segment_file(code, problem.problem_id + ".v");
        } catch (const Error& e) {
            if (e.is_infrastructure()) throw;
        }
        f.syntax_pass = !mods.empty();
        for (const auto& m : mods) f.syntax_pass = f.syntax_pass && m.structurally_complete && syntax.check(m).valid;
        if (f.syntax_pass) {
            auto dir = std::filesystem::temp_directory_path() /
                       ("rtlkit-tb-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
            auto design = dir / "design.v";
            write_file(design, code);
            try {
                auto r = run_shell(expand_command(problem.command,
                                                  {{"design", design.string()}, {"problem", problem.problem_id}}),
                                   problem.timeout_seconds);
                f.functional_pass = r.exit_code == 0;
            } catch (const Error& e) {
                std::error_code ec;
                std::filesystem::remove_all(dir, ec);
                if (e.kind() != ErrorKind::Timeout) throw;
            }
            std::error_code ec;
            std::filesystem::remove_all(dir, ec);
        }
        flags.push_back(f);
    }
    return TrialRecord::from_trials(problem.problem_id, std::move(flags));
}

} // namespace rtlkit::evalkit
