#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "rtlkit/embedcore/rte2.hpp"

namespace rtlkit::evalkit {

struct BitextScores {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::vector<std::size_t> predictions;  // best candidate per query
};

namespace detail {

inline double row_norm(std::span<const float> r) {
    double s = 0;
    for (float x : r) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

} // namespace detail

/// Each query predicts its highest-cosine candidate (lowest index on ties).
/// Precision divides correct predictions by queries, recall by gold pairs.
inline BitextScores bitext_mine(const embedcore::EmbeddingMatrix& queries, const embedcore::EmbeddingMatrix& candidates,
                                const std::map<std::size_t, std::size_t>& gold) {
    require(queries.count() >= 1 && candidates.count() >= 1, ErrorKind::Precondition,
            "bitext mining needs at least one query and one candidate");
    require(queries.dim == candidates.dim, ErrorKind::Precondition, "query and candidate dimensions differ");
    std::vector<std::size_t> seen_targets;
    for (auto [q, c] : gold) {
        require(q < queries.count() && c < candidates.count(), ErrorKind::InvalidInput, "gold index out of range");
        seen_targets.push_back(c);
    }
    std::sort(seen_targets.begin(), seen_targets.end());
    require(std::adjacent_find(seen_targets.begin(), seen_targets.end()) == seen_targets.end(),
            ErrorKind::InvalidInput, "gold mapping is not injective");

    std::vector<double> cand_norm(candidates.count());
    for (std::size_t j = 0; j < candidates.count(); ++j) {
        cand_norm[j] = detail::row_norm(candidates.row(j));
        if (cand_norm[j] == 0) fail(ErrorKind::NumericError, "candidate " + std::to_string(j) + " has zero norm");
    }
    BitextScores s;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < queries.count(); ++i) {
        auto q = queries.row(i);
        const double qn = detail::row_norm(q);
        if (qn == 0) fail(ErrorKind::NumericError, "query " + std::to_string(i) + " has zero norm");
        std::size_t best = 0;
        double best_sim = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < candidates.count(); ++j) {
            auto c = candidates.row(j);
            double d = 0;
            for (std::size_t k = 0; k < q.size(); ++k) d += static_cast<double>(q[k]) * c[k];
            const double sim = d / (qn * cand_norm[j]);
            if (sim > best_sim) {
                best_sim = sim;
                best = j;
            }
        }
        s.predictions.push_back(best);
        auto g = gold.find(i);
        if (g != gold.end() && g->second == best) ++correct;
    }
    s.precision = static_cast<double>(correct) / static_cast<double>(queries.count());
    s.recall = gold.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold.size());
    // 2PR/(P+R) reduces to 2c/(q+g); one division keeps it correctly rounded.
    s.f1 = correct ? 2.0 * static_cast<double>(correct) / static_cast<double>(queries.count() + gold.size()) : 0.0;
    return s;
}

struct ScoredPair {
    double similarity = 0;
    int label = 0;
};

/// Area under the precision-recall step curve of the descending ranking;
/// equal similarities keep their input order.
inline double average_precision(const std::vector<ScoredPair>& pairs) {
    std::size_t positives = 0;
    for (const auto& p : pairs) {
        require(p.label == 0 || p.label == 1, ErrorKind::InvalidInput, "labels must be 0 or 1");
        require(std::isfinite(p.similarity), ErrorKind::InvalidInput, "non-finite similarity");
        positives += static_cast<std::size_t>(p.label);
    }
    require(positives > 0, ErrorKind::Precondition, "average precision needs at least one positive");
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pairs[a].similarity > pairs[b].similarity; });
    long double ap = 0;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (!pairs[order[rank]].label) continue;
        ++tp;
        ap += static_cast<long double>(tp) / static_cast<long double>(rank + 1);
    }
    return static_cast<double>(ap / static_cast<long double>(positives));
}

struct PairClassification {
    double average_precision = 0;
    double accuracy = 0;
    double accuracy_threshold = 0;
    double f1 = 0;
    double precision = 0;  // at the F1-optimal threshold
    double recall = 0;
    double f1_threshold = 0;
};

/// A pair is predicted equivalent when its similarity exceeds the threshold.
/// Thresholds run from +inf down through midpoints of consecutive distinct
/// similarities to -inf; the first threshold reaching a maximum is reported.
inline PairClassification pair_classification(const std::vector<ScoredPair>& pairs) {
    PairClassification out;
    out.average_precision = average_precision(pairs);
    std::size_t pos = 0;
    for (const auto& p : pairs) pos += static_cast<std::size_t>(p.label);
    const std::size_t neg = pairs.size() - pos;
    require(neg > 0, ErrorKind::Precondition, "threshold metrics need at least one negative");

    std::vector<double> sims;
    for (const auto& p : pairs) sims.push_back(p.similarity);
    std::sort(sims.begin(), sims.end(), std::greater<>());
    sims.erase(std::unique(sims.begin(), sims.end()), sims.end());
    std::vector<double> thresholds{std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i + 1 < sims.size(); ++i) thresholds.push_back((sims[i] + sims[i + 1]) / 2);
    thresholds.push_back(-std::numeric_limits<double>::infinity());

    out.accuracy = -1;
    out.f1 = -1;
    for (double t : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (const auto& p : pairs)
            if (p.similarity > t) (p.label ? tp : fp)++;
        const std::size_t fn = pos - tp, tn = neg - fp;
        const double acc = static_cast<double>(tp + tn) / static_cast<double>(pairs.size());
        const double f1 = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
        if (acc > out.accuracy) {
            out.accuracy = acc;
            out.accuracy_threshold = t;
        }
        if (f1 > out.f1) {
            out.f1 = f1;
            out.f1_threshold = t;
            out.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
            out.recall = static_cast<double>(tp) / static_cast<double>(pos);
        }
    }
    return out;
}

} // namespace rtlkit::evalkit
