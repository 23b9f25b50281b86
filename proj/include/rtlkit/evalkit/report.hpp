#pragma once

#include <string>
#include <vector>

#include "rtlkit/common/io.hpp"
#include "rtlkit/evalkit/lexical.hpp"
#include "rtlkit/evalkit/passk.hpp"
#include "rtlkit/evalkit/regression.hpp"
#include "rtlkit/evalkit/retrieval.hpp"

namespace rtlkit::evalkit {

/// Named metric values plus the configuration that produced them.
struct MetricReport {
    ordered_json metrics = ordered_json::object();
    ordered_json config = ordered_json::object();

    ordered_json to_json() const {
        ordered_json j;
        j["metrics"] = metrics;
        j["config"] = config;
        return j;
    }
};

struct TextPair {
    std::string candidate;
    std::string reference;
};

/// Corpus means of the lexical understanding metrics.
inline ordered_json understanding_scores(const std::vector<TextPair>& pairs) {
    require(!pairs.empty(), ErrorKind::Precondition, "no candidate/reference pairs");
    double bleu = 0, r1 = 0, r2 = 0, rl = 0, r1r = 0, r2r = 0, rlr = 0, met = 0;
    for (const auto& p : pairs) {
        bleu += bleu4_smoothed(p.candidate, p.reference);
        auto r = rouge(p.candidate, p.reference);
        r1 += r.rouge1.f1;
        r2 += r.rouge2.f1;
        rl += r.rougeL.f1;
        r1r += r.rouge1.recall;
        r2r += r.rouge2.recall;
        rlr += r.rougeL.recall;
        met += meteor_lite(p.candidate, p.reference);
    }
    const double n = static_cast<double>(pairs.size());
    ordered_json j;
    j["count"] = pairs.size();
    j["bleu4"] = bleu / n;
    j["rouge1_f1"] = r1 / n;
    j["rouge2_f1"] = r2 / n;
    j["rougeL_f1"] = rl / n;
    j["rouge1_recall"] = r1r / n;
    j["rouge2_recall"] = r2r / n;
    j["rougeL_recall"] = rlr / n;
    j["meteor"] = met / n;
    return j;
}

inline ordered_json to_json(const PassAtK& p) {
    ordered_json j;
    j["syntax"] = p.syntax;
    j["functional"] = p.functional;
    return j;
}

inline ordered_json to_json(const PassReport& r) {
    ordered_json per = ordered_json::array();
    for (const auto& t : r.per_temperature) {
        ordered_json e;
        e["temperature"] = t.temperature;
        for (const auto& [k, v] : t.by_k) e["pass@" + std::to_string(k)] = to_json(v);
        per.push_back(e);
    }
    ordered_json best;
    for (const auto& [k, v] : r.best) best["pass@" + std::to_string(k)] = to_json(v);
    ordered_json j;
    j["per_temperature"] = per;
    j["best"] = best;
    return j;
}

inline ordered_json to_json(const BitextScores& s) {
    ordered_json j;
    j["f1"] = s.f1;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    return j;
}

/// JSON has no infinities; unbounded thresholds are written as strings.
inline ordered_json threshold_json(double t) {
    if (std::isinf(t)) return t > 0 ? "+inf" : "-inf";
    return t;
}

inline ordered_json to_json(const PairClassification& p) {
    ordered_json j;
    j["average_precision"] = p.average_precision;
    j["accuracy"] = p.accuracy;
    j["accuracy_threshold"] = threshold_json(p.accuracy_threshold);
    j["f1"] = p.f1;
    j["precision"] = p.precision;
    j["recall"] = p.recall;
    j["f1_threshold"] = threshold_json(p.f1_threshold);
    return j;
}

inline ordered_json to_json(const RegressionScores& s) {
    ordered_json j;
    j["r2_score"] = s.r2_score;
    j["mape_percent"] = s.mape_percent;
    j["rrse"] = s.rrse;
    return j;
}

} // namespace rtlkit::evalkit
