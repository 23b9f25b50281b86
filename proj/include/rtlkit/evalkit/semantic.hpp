#pragma once

#include <regex>
#include <string>

#include "rtlkit/annotate/chat_client.hpp"
#include "rtlkit/annotate/prompts.hpp"
#include "rtlkit/embedcore/embed_client.hpp"

namespace rtlkit::evalkit {

inline constexpr const char* kJudgeTemplate = "judge_score";

/// A bare decimal in [0, 1]; anything else is rejected rather than clamped.
inline double parse_judge_score(const std::string& reply) {
    static const std::regex number(R"(^\s*([0-9]*\.?[0-9]+)\s*$)");
    std::smatch m;
    if (!std::regex_match(reply, m, number))
        fail(ErrorKind::MalformedResponse, "judge reply is not a number: '" + reply.substr(0, 80) + "'");
    const double v = std::stod(m[1].str());
    if (v < 0 || v > 1) fail(ErrorKind::MalformedResponse, "judge score outside [0, 1]: " + m[1].str());
    return v;
}

struct SemanticScores {
    double embedding_similarity = 0;
    double gpt_score = 0;
};

struct JudgeConfig {
    std::string model = "gpt-4o";
    double temperature = 0.0;
};

inline SemanticScores semantic_scores(const std::string& candidate, const std::string& reference,
                                      embedcore::EmbedClient& embedder, annotate::ChatClient& judge,
                                      const annotate::PromptLibrary& prompts, const JudgeConfig& cfg = {}) {
    auto vs = embedder.embed({candidate, reference});
    require(vs.size() == 2, ErrorKind::ClientFailure, "embed client returned the wrong number of vectors");
    SemanticScores s;
    s.embedding_similarity = embedcore::cosine(vs[0], vs[1]);
    auto prompt = prompts.render(kJudgeTemplate, {{"candidate", candidate}, {"reference", reference}});
    s.gpt_score = parse_judge_score(judge.complete(annotate::ChatRequest::user(cfg.model, prompt, cfg.temperature)));
    return s;
}

} // namespace rtlkit::evalkit
