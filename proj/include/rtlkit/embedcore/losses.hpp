#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "rtlkit/embedcore/linalg.hpp"

namespace rtlkit::embedcore {

inline constexpr double kDefaultTemperature = 0.02;

struct ContrastiveBatch {
    std::vector<Vec> queries;
    std::vector<Vec> positives;
    std::optional<std::vector<Vec>> hard_negatives;
    double temperature = kDefaultTemperature;

    std::size_t size() const { return queries.size(); }

    void validate() const {
        require(!queries.empty(), ErrorKind::Precondition, "contrastive batch is empty");
        require(queries.size() == positives.size(), ErrorKind::Precondition, "queries and positives not aligned");
        if (hard_negatives)
            require(hard_negatives->size() == queries.size(), ErrorKind::Precondition,
                    "hard negatives not aligned with queries");
        require(temperature > 0 && std::isfinite(temperature), ErrorKind::Precondition, "temperature must be > 0");
        const auto d = queries.front().size();
        auto check = [&](const std::vector<Vec>& vs) {
            for (const auto& v : vs) {
                require(v.size() == d, ErrorKind::Precondition, "embedding dimension mismatch in batch");
                require(all_finite(v), ErrorKind::NumericError, "non-finite embedding in batch");
            }
        };
        check(queries);
        check(positives);
        if (hard_negatives) check(*hard_negatives);
    }
};

/// Gradients of a contrastive loss with respect to every batch vector.
struct ContrastiveGrad {
    std::vector<Vec> queries;
    std::vector<Vec> positives;
    std::vector<Vec> hard_negatives;
};

namespace detail {

/// InfoNCE with in-batch positives, optionally adding hard negatives to the
/// denominator. Uses log-sum-exp so tiny temperatures stay finite.
inline double contrastive_loss(const ContrastiveBatch& b, bool use_negatives, ContrastiveGrad* grad) {
    b.validate();
    require(!use_negatives || b.hard_negatives, ErrorKind::Precondition, "batch has no hard negatives");
    const std::size_t M = b.size();
    const double tau = b.temperature;
    const auto* negs = use_negatives ? &*b.hard_negatives : nullptr;
    if (grad) {
        const Vec zero(b.queries.front().size(), 0.0);
        grad->queries.assign(M, zero);
        grad->positives.assign(M, zero);
        grad->hard_negatives.assign(negs ? M : 0, zero);
    }
    double total = 0;
    std::vector<double> logits(negs ? 2 * M : M);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < M; ++j) logits[j] = cosine(b.queries[i], b.positives[j]) / tau;
        if (negs)
            for (std::size_t j = 0; j < M; ++j) logits[M + j] = cosine(b.queries[i], (*negs)[j]) / tau;
        const double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0;
        for (double l : logits) z += std::exp(l - mx);
        const double lse = mx + std::log(z);
        total += lse - logits[i];
        if (!grad) continue;
        for (std::size_t j = 0; j < logits.size(); ++j) {
            double g = std::exp(logits[j] - lse) - (j == i ? 1.0 : 0.0);
            g /= static_cast<double>(M) * tau;
            const Vec& other = j < M ? b.positives[j] : (*negs)[j - M];
            Vec& other_grad = j < M ? grad->positives[j] : grad->hard_negatives[j - M];
            add_cosine_grad(b.queries[i], other, g, grad->queries[i]);
            add_cosine_grad(other, b.queries[i], g, other_grad);
        }
    }
    return total / static_cast<double>(M);
}

} // namespace detail

/// In-batch contrastive loss over (query, positive) pairs; negatives ignored.
inline double loss_emb_no_hard(const ContrastiveBatch& b, ContrastiveGrad* grad = nullptr) {
    return detail::contrastive_loss(b, false, grad);
}

/// Contrastive loss whose denominator also sums over the hard negatives.
inline double loss_emb_with_hard(const ContrastiveBatch& b, ContrastiveGrad* grad = nullptr) {
    return detail::contrastive_loss(b, true, grad);
}

/// Mean next-token cross-entropy over probability rows. A zero probability at a
/// target is an error rather than being clamped.
inline double loss_generative(const Matrix& predicted, const std::vector<std::uint32_t>& targets) {
    require(predicted.rows == targets.size() && !targets.empty(), ErrorKind::Precondition,
            "generative loss needs one target per row");
    double total = 0;
    for (std::size_t i = 0; i < predicted.rows; ++i) {
        double sum = 0;
        for (double p : predicted.row(i)) {
            require(p >= 0 && std::isfinite(p), ErrorKind::NumericError, "invalid probability");
            sum += p;
        }
        require(std::abs(sum - 1.0) <= 1e-6, ErrorKind::Precondition,
                "probability row " + std::to_string(i) + " does not sum to 1");
        require(targets[i] < predicted.cols, ErrorKind::Precondition, "target id out of range");
        const double p = predicted(i, targets[i]);
        if (p == 0) fail(ErrorKind::NumericError, "zero probability at target of row " + std::to_string(i));
        total -= std::log(p);
    }
    return total / static_cast<double>(targets.size());
}

/// Softmax of each row.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        auto r = logits.row(i);
        const double mx = *std::max_element(r.begin(), r.end());
        double z = 0;
        for (std::size_t k = 0; k < r.size(); ++k) z += (p(i, k) = std::exp(r[k] - mx));
        for (std::size_t k = 0; k < r.size(); ++k) p(i, k) /= z;
    }
    return p;
}

/// Cross-entropy from logits, with the gradient with respect to the logits.
inline double loss_generative_logits(const Matrix& logits, const std::vector<std::uint32_t>& targets,
                                     Matrix* dlogits = nullptr) {
    require(logits.rows == targets.size() && !targets.empty(), ErrorKind::Precondition,
            "generative loss needs one target per row");
    const double n = static_cast<double>(targets.size());
    double total = 0;
    if (dlogits) *dlogits = Matrix(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        auto r = logits.row(i);
        require(targets[i] < logits.cols, ErrorKind::Precondition, "target id out of range");
        const double mx = *std::max_element(r.begin(), r.end());
        double z = 0;
        for (double l : r) z += std::exp(l - mx);
        const double lse = mx + std::log(z);
        total += lse - r[targets[i]];
        if (dlogits)
            for (std::size_t k = 0; k < r.size(); ++k)
                (*dlogits)(i, k) = (std::exp(r[k] - lse) - (k == targets[i] ? 1.0 : 0.0)) / n;
    }
    return total / n;
}

/// Training objectives of the two embedding phases.
struct CombinedLoss {
    double embedding = 0;
    double generative = 0;
    double total() const { return embedding + generative; }
};

inline CombinedLoss loss_l1(const ContrastiveBatch& b, double generative) {
    return {loss_emb_no_hard(b), generative};
}

inline CombinedLoss loss_l2(const ContrastiveBatch& b, double generative) {
    return {loss_emb_with_hard(b), generative};
}

} // namespace rtlkit::embedcore
