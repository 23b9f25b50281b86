#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtlkit/annotate/annotate.hpp"
#include "rtlkit/annotate/chat_client.hpp"
#include "rtlkit/annotate/prompts.hpp"
#include "rtlkit/common/parallel.hpp"
#include "rtlkit/corpus/module.hpp"
#include "rtlkit/rewrite/lec.hpp"

namespace rtlkit::rewrite {

enum class InstructionKind { Initial, AfterEquivalent, AfterInequivalent, AfterSyntaxError };

inline std::string_view to_string(InstructionKind k) {
    switch (k) {
    case InstructionKind::Initial: return "Initial";
    case InstructionKind::AfterEquivalent: return "AfterEquivalent";
    case InstructionKind::AfterInequivalent: return "AfterInequivalent";
    case InstructionKind::AfterSyntaxError: return "AfterSyntaxError";
    }
    return "?";
}

inline InstructionKind instruction_from_string(std::string_view s) {
    if (s == "Initial") return InstructionKind::Initial;
    if (s == "AfterEquivalent") return InstructionKind::AfterEquivalent;
    if (s == "AfterInequivalent") return InstructionKind::AfterInequivalent;
    if (s == "AfterSyntaxError") return InstructionKind::AfterSyntaxError;
    fail(ErrorKind::ParseError, "unknown instruction kind: " + std::string(s));
}

/// Instruction for the next round given the verdict on the previous one.
constexpr InstructionKind next_instruction(Verdict previous) {
    switch (previous) {
    case Verdict::Equivalent: return InstructionKind::AfterEquivalent;
    case Verdict::Inequivalent: return InstructionKind::AfterInequivalent;
    case Verdict::SyntaxError: return InstructionKind::AfterSyntaxError;
    }
    return InstructionKind::Initial;
}

inline std::string template_name(InstructionKind k) {
    switch (k) {
    case InstructionKind::Initial: return "rewrite_initial";
    case InstructionKind::AfterEquivalent: return "rewrite_after_equivalent";
    case InstructionKind::AfterInequivalent: return "rewrite_after_inequivalent";
    case InstructionKind::AfterSyntaxError: return "rewrite_after_syntax_error";
    }
    return {};
}

struct RewritePair {
    std::string original_id;
    std::string rewrite_text;
    Verdict verdict = Verdict::SyntaxError;
    std::size_t round = 1;
    InstructionKind instruction_kind = InstructionKind::Initial;

    bool operator==(const RewritePair&) const = default;
};

/// Why a chain stopped before its last round.
struct ChainFailure {
    std::string original_id;
    std::size_t round = 0;
    ErrorKind kind = ErrorKind::ClientFailure;
    std::string message;
};

struct RewriteChain {
    std::vector<RewritePair> pairs;
    std::optional<ChainFailure> failure;
};

struct RewriteConfig {
    std::size_t rounds = 3;
    std::string model = "gpt-4o";
    double temperature = 0.0;

    void validate() const {
        require(rounds >= 1 && rounds <= 5, ErrorKind::Precondition,
                "rewrite rounds must be in [1, 5], got " + std::to_string(rounds));
    }
};

/// Prompt for one round. Every round targets the original design; later rounds
/// also carry the previous rewrite and its verdict.
inline std::string rewrite_prompt(const corpus::VerilogModule& module, const annotate::AnnotationRecord& annotation,
                                  InstructionKind kind, const RewritePair* previous,
                                  const annotate::PromptLibrary& prompts) {
    std::map<std::string, std::string> values{
        {"code", module.source_text},
        {"description", annotation.high_level_description.value_or("")},
        {"specification", annotation.specification.value_or("")},
    };
    if (previous) {
        values["previous"] = previous->rewrite_text;
        values["verdict"] = std::string(to_string(previous->verdict));
    }
    return prompts.render(template_name(kind), values);
}

inline RewriteChain run_rewrite_loop(const corpus::VerilogModule& module,
                                     const annotate::AnnotationRecord& annotation, annotate::ChatClient& client,
                                     LecChecker& lec, const annotate::PromptLibrary& prompts,
                                     const RewriteConfig& cfg) {
    cfg.validate();
    require(annotation.specification && annotation.high_level_description, ErrorKind::Precondition,
            module.id + ": rewrite needs a specification and a description");
    RewriteChain chain;
    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
        const RewritePair* previous = chain.pairs.empty() ? nullptr : &chain.pairs.back();
        auto kind = previous ? next_instruction(previous->verdict) : InstructionKind::Initial;
        try {
            auto prompt = rewrite_prompt(module, annotation, kind, previous, prompts);
            auto reply = client.complete(annotate::ChatRequest::user(cfg.model, prompt, cfg.temperature));
            auto code = text::strip_code_fence(reply);
            auto verdict = lec.check(module.source_text, code);
            chain.pairs.push_back({module.id, std::move(code), verdict, round, kind});
        } catch (const Error& e) {
            chain.failure = ChainFailure{module.id, round, e.kind(), e.what()};
            break;
        }
    }
    return chain;
}

/// Runs one chain per module on a bounded pool; results keep module order.
inline std::vector<RewriteChain> run_rewrite_corpus(const std::vector<corpus::VerilogModule>& modules,
                                                    const std::map<std::string, annotate::AnnotationRecord>& notes,
                                                    annotate::ChatClient& client,
                                                    const std::function<LecChecker&(std::size_t worker)>& lec_for,
                                                    const annotate::PromptLibrary& prompts, const RewriteConfig& cfg,
                                                    std::size_t jobs) {
    cfg.validate();
    std::vector<RewriteChain> chains(modules.size());
    parallel_for(modules.size(), jobs, [&](std::size_t i) {
        auto it = notes.find(modules[i].id);
        if (it == notes.end()) {
            chains[i].failure = ChainFailure{modules[i].id, 0, ErrorKind::MissingStage, "no annotation record"};
            return;
        }
        try {
            chains[i] = run_rewrite_loop(modules[i], it->second, client, lec_for(i), prompts, cfg);
        } catch (const Error& e) {
            chains[i].failure = ChainFailure{modules[i].id, 0, e.kind(), e.what()};
        }
    });
    return chains;
}

inline ordered_json to_json(const RewritePair& p) {
    ordered_json j;
    j["original_id"] = p.original_id;
    j["round"] = p.round;
    j["instruction_kind"] = to_string(p.instruction_kind);
    j["verdict"] = to_string(p.verdict);
    j["rewrite_text"] = p.rewrite_text;
    return j;
}

inline RewritePair rewrite_pair_from_json(const json& j) {
    try {
        RewritePair p;
        p.original_id = j.at("original_id").get<std::string>();
        p.round = j.at("round").get<std::size_t>();
        p.instruction_kind = instruction_from_string(j.at("instruction_kind").get<std::string>());
        p.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        p.rewrite_text = j.at("rewrite_text").get<std::string>();
        require(p.round >= 1, ErrorKind::ParseError, "rewrite round must be >= 1");
        return p;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("bad rewrite record: ") + e.what());
    }
}

inline ordered_json to_json(const ChainFailure& f) {
    ordered_json j;
    j["original_id"] = f.original_id;
    j["round"] = f.round;
    j["error_kind"] = to_string(f.kind);
    j["message"] = f.message;
    return j;
}

} // namespace rtlkit::rewrite
