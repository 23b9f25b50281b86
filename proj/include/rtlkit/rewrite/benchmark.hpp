#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "rtlkit/rewrite/loop.hpp"

namespace rtlkit::rewrite {

struct LabeledPair {
    std::string code_a;
    std::string code_b;
    int label = 0;  // 1 when equivalent

    bool operator==(const LabeledPair&) const = default;
};

/// Labeled (original, rewrite) pairs; syntax errors are dropped and each design
/// contributes at most `per_design_cap` pairs, earliest rounds first.
/// Designs appear in order of first occurrence in `pairs`.
inline std::vector<LabeledPair> build_equivalence_benchmark(const std::vector<RewritePair>& pairs,
                                                            const std::map<std::string, std::string>& originals,
                                                            std::size_t per_design_cap) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const RewritePair*>> by_design;
    for (const auto& p : pairs) {
        if (p.verdict == Verdict::SyntaxError) continue;
        auto [it, inserted] = by_design.try_emplace(p.original_id);
        if (inserted) order.push_back(p.original_id);
        it->second.push_back(&p);
    }
    std::vector<LabeledPair> out;
    for (const auto& id : order) {
        auto src = originals.find(id);
        require(src != originals.end(), ErrorKind::InvalidInput, "rewrite refers to unknown module " + id);
        auto& group = by_design[id];
        std::stable_sort(group.begin(), group.end(),
                         [](const RewritePair* a, const RewritePair* b) { return a->round < b->round; });
        for (std::size_t i = 0; i < group.size() && i < per_design_cap; ++i)
            out.push_back({src->second, group[i]->rewrite_text, group[i]->verdict == Verdict::Equivalent ? 1 : 0});
    }
    return out;
}

inline ordered_json to_json(const LabeledPair& p) {
    ordered_json j;
    j["code_a"] = p.code_a;
    j["code_b"] = p.code_b;
    j["label"] = p.label;
    return j;
}

inline LabeledPair labeled_pair_from_json(const json& j) {
    try {
        LabeledPair p{j.at("code_a").get<std::string>(), j.at("code_b").get<std::string>(), j.at("label").get<int>()};
        require(p.label == 0 || p.label == 1, ErrorKind::ParseError, "label must be 0 or 1");
        return p;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("bad labeled pair: ") + e.what());
    }
}

} // namespace rtlkit::rewrite
