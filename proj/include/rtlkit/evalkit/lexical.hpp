#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/text.hpp"

namespace rtlkit::evalkit {

inline constexpr double kBleuEpsilon = 0.1;

using Tokens = std::vector<std::string>;

inline Tokens metric_tokens(std::string_view s) { return text::word_tokens(s); }

inline std::map<Tokens, std::size_t> ngram_counts(const Tokens& t, std::size_t n) {
    std::map<Tokens, std::size_t> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + static_cast<std::ptrdiff_t>(i),
                                                              t.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return out;
}

inline std::size_t clipped_overlap(const std::map<Tokens, std::size_t>& cand,
                                   const std::map<Tokens, std::size_t>& ref) {
    std::size_t m = 0;
    for (const auto& [g, c] : cand) {
        auto it = ref.find(g);
        if (it != ref.end()) m += std::min(c, it->second);
    }
    return m;
}

/// Sentence BLEU-4. An n-gram order with no matches contributes eps / total
/// (eps / 1 when the candidate has no n-grams of that order).
inline double bleu4_smoothed(std::string_view candidate, std::string_view reference) {
    auto c = metric_tokens(candidate), r = metric_tokens(reference);
    require(!c.empty() && !r.empty(), ErrorKind::InvalidInput, "BLEU needs non-empty candidate and reference");
    double log_sum = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        auto cc = ngram_counts(c, n);
        const double total = c.size() >= n ? static_cast<double>(c.size() - n + 1) : 0.0;
        const auto match = static_cast<double>(clipped_overlap(cc, ngram_counts(r, n)));
        const double p = match > 0 ? match / total : kBleuEpsilon / std::max(total, 1.0);
        log_sum += std::log(p);
    }
    const double cl = static_cast<double>(c.size()), rl = static_cast<double>(r.size());
    const double bp = cl < rl ? std::exp(1.0 - rl / cl) : 1.0;
    return bp * std::exp(log_sum / 4.0);
}

struct Prf {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

inline Prf make_prf(double overlap, double cand_total, double ref_total) {
    Prf s;
    s.precision = cand_total > 0 ? overlap / cand_total : 0.0;
    s.recall = ref_total > 0 ? overlap / ref_total : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

struct RougeScores {
    Prf rouge1, rouge2, rougeL;
    std::size_t lcs = 0;
};

inline RougeScores rouge(std::string_view candidate, std::string_view reference) {
    auto c = metric_tokens(candidate), r = metric_tokens(reference);
    require(!c.empty() && !r.empty(), ErrorKind::InvalidInput, "ROUGE needs non-empty candidate and reference");
    RougeScores s;
    for (std::size_t n : {1u, 2u}) {
        auto overlap = static_cast<double>(clipped_overlap(ngram_counts(c, n), ngram_counts(r, n)));
        auto ct = c.size() >= n ? static_cast<double>(c.size() - n + 1) : 0.0;
        auto rt = r.size() >= n ? static_cast<double>(r.size() - n + 1) : 0.0;
        (n == 1 ? s.rouge1 : s.rouge2) = make_prf(overlap, ct, rt);
    }
    s.lcs = lcs_length(c, r);
    s.rougeL = make_prf(static_cast<double>(s.lcs), static_cast<double>(c.size()), static_cast<double>(r.size()));
    return s;
}

struct MeteorDetail {
    double score = 0;
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

/// Exact-match METEOR: leftmost-greedy unigram alignment, no stemming or synonyms.
inline MeteorDetail meteor_lite_detail(std::string_view candidate, std::string_view reference) {
    auto c = metric_tokens(candidate), r = metric_tokens(reference);
    require(!c.empty() && !r.empty(), ErrorKind::InvalidInput, "METEOR needs non-empty candidate and reference");
    std::vector<bool> used(r.size(), false);
    std::vector<std::ptrdiff_t> align(c.size(), -1);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < r.size(); ++j)
            if (!used[j] && c[i] == r[j]) {
                used[j] = true;
                align[i] = static_cast<std::ptrdiff_t>(j);
                break;
            }
    MeteorDetail d;
    std::ptrdiff_t last = -2;
    bool in_chunk = false;
    for (auto a : align) {
        if (a < 0) {
            in_chunk = false;
            continue;
        }
        ++d.matches;
        if (!in_chunk || a != last + 1) ++d.chunks;
        in_chunk = true;
        last = a;
    }
    if (d.matches == 0) return d;
    const double m = static_cast<double>(d.matches);
    const double P = m / static_cast<double>(c.size()), R = m / static_cast<double>(r.size());
    const double fmean = 10 * P * R / (R + 9 * P);
    const double frag = static_cast<double>(d.chunks) / m;
    d.score = fmean * (1 - 0.5 * frag * frag * frag);
    return d;
}

inline double meteor_lite(std::string_view candidate, std::string_view reference) {
    return meteor_lite_detail(candidate, reference).score;
}

} // namespace rtlkit::evalkit
