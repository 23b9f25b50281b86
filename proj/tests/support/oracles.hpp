#pragma once

// Independent reference implementations used by the unit and acceptance suites.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <vector>

#include "rtlkit/common/random.hpp"

namespace oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    cpp_int r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// 1 - C(n-c, k) / C(n, k) as an exact fraction.
inline cpp_rational pass_at_k(unsigned n, unsigned c, unsigned k) {
    return cpp_rational(1) - cpp_rational(binomial(n - c, k), binomial(n, k));
}

/// Fraction of random k-subsets of n trials that include one of the first c.
inline double pass_at_k_monte_carlo(unsigned n, unsigned c, unsigned k, unsigned draws, rtlkit::Rng& rng) {
    std::vector<unsigned> idx(n);
    unsigned hits = 0;
    for (unsigned d = 0; d < draws; ++d) {
        for (unsigned i = 0; i < n; ++i) idx[i] = i;
        // partial Fisher-Yates: the first k slots form a uniform k-subset
        bool hit = false;
        for (unsigned i = 0; i < k; ++i) {
            std::swap(idx[i], idx[i + rng.below(n - i)]);
            hit = hit || idx[i] < c;
        }
        hits += hit;
    }
    return static_cast<double>(hits) / draws;
}

/// Integer vectors of equal norm, so cosine order equals dot-product order.
struct IntVec {
    long x, y;
};

struct BitextOutcome {
    std::vector<std::size_t> predictions;
    cpp_rational precision, recall, f1;
};

inline BitextOutcome bitext(const std::vector<IntVec>& q, const std::vector<IntVec>& c,
                            const std::map<std::size_t, std::size_t>& gold) {
    BitextOutcome o;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        std::vector<std::size_t> order(c.size());
        for (std::size_t j = 0; j < c.size(); ++j) order[j] = j;
        auto dotq = [&](std::size_t j) { return q[i].x * c[j].x + q[i].y * c[j].y; };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dotq(a) != dotq(b) ? dotq(a) > dotq(b) : a < b;
        });
        o.predictions.push_back(order.front());
        auto g = gold.find(i);
        correct += g != gold.end() && g->second == order.front();
    }
    o.precision = cpp_rational(correct, q.size());
    o.recall = gold.empty() ? cpp_rational(0) : cpp_rational(correct, gold.size());
    o.f1 = o.precision + o.recall > 0 ? 2 * o.precision * o.recall / (o.precision + o.recall) : cpp_rational(0);
    return o;
}

struct PairOutcome {
    cpp_rational best_accuracy;
    cpp_rational best_f1;
    std::optional<cpp_rational> average_precision;
};

/// Tries every way of cutting the similarity ranking (all-negative, then
/// "above each observed similarity value"), and ranks with a stable sort for AP.
inline PairOutcome pairs(const std::vector<double>& sims, const std::vector<int>& labels) {
    PairOutcome o;
    const std::size_t n = sims.size();
    std::size_t pos = 0;
    for (int l : labels) pos += l;
    std::vector<std::optional<double>> cuts{std::nullopt};
    for (double s : sims) cuts.push_back(s);
    bool first = true;
    for (auto cut : cuts) {
        for (bool strictly_above : {true, false}) {
            std::size_t tp = 0, fp = 0;
            for (std::size_t i = 0; i < n; ++i) {
                bool predicted = cut && (strictly_above ? sims[i] > *cut : sims[i] >= *cut);
                if (predicted) (labels[i] ? tp : fp)++;
            }
            const std::size_t fn = pos - tp, tn = (n - pos) - fp;
            cpp_rational acc(tp + tn, n);
            cpp_rational f1 = (2 * tp + fp + fn) ? cpp_rational(2 * tp, 2 * tp + fp + fn) : cpp_rational(0);
            if (first || acc > o.best_accuracy) o.best_accuracy = acc;
            if (first || f1 > o.best_f1) o.best_f1 = f1;
            first = false;
        }
    }
    if (pos > 0) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
        cpp_rational ap = 0, prev_recall = 0;
        std::size_t tp = 0;
        for (std::size_t r = 0; r < n; ++r) {
            tp += labels[order[r]];
            cpp_rational recall(tp, pos), precision(tp, r + 1);
            ap += (recall - prev_recall) * precision;
            prev_recall = recall;
        }
        o.average_precision = ap;
    }
    return o;
}

} // namespace oracle
