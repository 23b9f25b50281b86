#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rtlkit/common/hash.hpp"
#include "rtlkit/common/random.hpp"
#include "rtlkit/embedcore/losses.hpp"
#include "rtlkit/embedcore/pooling.hpp"

namespace rtlkit::embedcore {

struct ToyShape {
    std::size_t features = 2048;  // hashed character trigram buckets
    std::size_t dim = 64;
    std::size_t vocab = 1024;     // hashed token ids predicted by the language-model head
};

/// Projection W (dim x features) and language-model head U (vocab x dim).
struct ToyParams {
    ToyShape shape;
    Matrix projection;
    Matrix lm_head;

    static ToyParams init(std::uint64_t seed, ToyShape shape = {}, double scale = 0.1) {
        require(shape.features > 0 && shape.dim > 0 && shape.vocab > 0, ErrorKind::Precondition,
                "toy encoder sizes must be positive");
        Rng rng(seed);
        ToyParams p{shape, Matrix(shape.dim, shape.features), Matrix(shape.vocab, shape.dim)};
        for (double& x : p.projection.data) x = scale * rng.normal();
        for (double& x : p.lm_head.data) x = scale * rng.normal();
        return p;
    }
};

using SparseVec = std::vector<std::pair<std::uint32_t, double>>;  // sorted by index

/// A text split into tokens with their sparse trigram features.
struct ToyText {
    std::vector<std::string> words;
    std::vector<std::uint32_t> token_ids;
    std::vector<SparseVec> features;  // one per token
    SparseVec pooled;                 // position-weighted sum of `features`
};

/// Identifier-like runs are one token; every other non-space byte is its own token.
inline std::vector<std::string> toy_words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '_' || c >= 0x80) {
            cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        } else {
            flush();
            if (!std::isspace(c)) out.emplace_back(1, ch);
        }
    }
    flush();
    return out;
}

inline SparseVec trigram_features(const std::string& word, std::size_t buckets) {
    const std::string padded = "\x02" + word + "\x03";
    std::map<std::uint32_t, double> counts;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
        counts[static_cast<std::uint32_t>(fnv1a64(std::string_view(padded).substr(i, 3)) % buckets)] += 1.0;
    return {counts.begin(), counts.end()};
}

inline ToyText tokenize_toy(std::string_view text, const ToyShape& shape) {
    ToyText t;
    t.words = toy_words(text);
    require(!t.words.empty(), ErrorKind::InvalidInput, "cannot encode empty text");
    const auto w = position_weights(t.words.size());
    std::map<std::uint32_t, double> pooled;
    for (std::size_t i = 0; i < t.words.size(); ++i) {
        t.token_ids.push_back(static_cast<std::uint32_t>(mix64(fnv1a64(t.words[i])) % shape.vocab));
        t.features.push_back(trigram_features(t.words[i], shape.features));
        for (auto [f, v] : t.features.back()) pooled[f] += w[i] * v;
    }
    t.pooled.assign(pooled.begin(), pooled.end());
    return t;
}

inline Vec project(const Matrix& W, const SparseVec& x) {
    Vec out(W.rows, 0.0);
    for (std::size_t r = 0; r < W.rows; ++r) {
        double s = 0;
        for (auto [f, v] : x) s += W(r, f) * v;
        out[r] = s;
    }
    return out;
}

/// Token hidden states: each row is the projection of that token's features.
inline TokenSequence toy_encoder(std::string_view text, const ToyParams& params) {
    auto t = tokenize_toy(text, params.shape);
    TokenSequence seq{t.token_ids, Matrix(t.words.size(), params.shape.dim)};
    for (std::size_t i = 0; i < t.features.size(); ++i) {
        auto h = project(params.projection, t.features[i]);
        std::copy(h.begin(), h.end(), seq.hidden_states.row(i).begin());
    }
    return seq;
}

/// Sentence embedding: pooled hidden states. Because hidden states are linear
/// in the features this equals W applied to the pooled features.
inline Vec encode(std::string_view text, const ToyParams& params) {
    return project(params.projection, tokenize_toy(text, params.shape).pooled);
}

struct ToyGrad {
    Matrix projection;
    Matrix lm_head;
};

/// Texts of one contrastive batch; `negatives` may be empty.
struct TextBatch {
    std::vector<std::string> queries;
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
};

enum class EmbeddingObjective { NoHard, WithHard };

struct ObjectiveOptions {
    EmbeddingObjective objective = EmbeddingObjective::WithHard;
    double temperature = kDefaultTemperature;
    bool include_generative = true;
};

/// Next-token loss over the positives: each token's hidden state predicts the
/// following token through the language-model head.
inline double toy_generative_loss(const std::vector<ToyText>& texts, const ToyParams& p, ToyGrad* grad) {
    std::vector<std::pair<const ToyText*, std::size_t>> positions;
    for (const auto& t : texts)
        for (std::size_t i = 0; i + 1 < t.token_ids.size(); ++i) positions.emplace_back(&t, i);
    if (positions.empty()) return 0.0;
    const auto& s = p.shape;
    Matrix hidden(positions.size(), s.dim), logits(positions.size(), s.vocab);
    std::vector<std::uint32_t> targets;
    for (std::size_t n = 0; n < positions.size(); ++n) {
        auto [t, i] = positions[n];
        auto h = project(p.projection, t->features[i]);
        std::copy(h.begin(), h.end(), hidden.row(n).begin());
        for (std::size_t v = 0; v < s.vocab; ++v) logits(n, v) = dot(p.lm_head.row(v), h);
        targets.push_back(t->token_ids[i + 1]);
    }
    Matrix dlogits;
    const double loss = loss_generative_logits(logits, targets, grad ? &dlogits : nullptr);
    if (!grad) return loss;
    for (std::size_t n = 0; n < positions.size(); ++n) {
        Vec dh(s.dim, 0.0);
        for (std::size_t v = 0; v < s.vocab; ++v) {
            const double g = dlogits(n, v);
            for (std::size_t k = 0; k < s.dim; ++k) {
                grad->lm_head(v, k) += g * hidden(n, k);
                dh[k] += g * p.lm_head(v, k);
            }
        }
        auto [t, i] = positions[n];
        for (std::size_t k = 0; k < s.dim; ++k)
            for (auto [f, x] : t->features[i]) grad->projection(k, f) += dh[k] * x;
    }
    return loss;
}

/// Embedding loss (plus optional generative loss) of a text batch, with the
/// gradient with respect to all parameters when `grad` is given.
inline CombinedLoss toy_objective(const TextBatch& texts, const ToyParams& p, const ObjectiveOptions& opt,
                                  ToyGrad* grad = nullptr) {
    const bool hard = opt.objective == EmbeddingObjective::WithHard;
    require(!hard || texts.negatives.size() == texts.queries.size(), ErrorKind::Precondition,
            "hard-negative objective needs one negative per query");
    auto tok = [&](const std::vector<std::string>& xs) {
        std::vector<ToyText> out;
        for (const auto& x : xs) out.push_back(tokenize_toy(x, p.shape));
        return out;
    };
    const auto q = tok(texts.queries), pos = tok(texts.positives);
    const auto neg = hard ? tok(texts.negatives) : std::vector<ToyText>{};

    ContrastiveBatch b;
    b.temperature = opt.temperature;
    for (const auto& t : q) b.queries.push_back(project(p.projection, t.pooled));
    for (const auto& t : pos) b.positives.push_back(project(p.projection, t.pooled));
    if (hard) {
        b.hard_negatives.emplace();
        for (const auto& t : neg) b.hard_negatives->push_back(project(p.projection, t.pooled));
    }
    if (grad) *grad = ToyGrad{Matrix(p.shape.dim, p.shape.features), Matrix(p.shape.vocab, p.shape.dim)};
    ContrastiveGrad cg;
    CombinedLoss loss;
    loss.embedding = hard ? loss_emb_with_hard(b, grad ? &cg : nullptr) : loss_emb_no_hard(b, grad ? &cg : nullptr);
    if (grad) {
        auto backprop = [&](const std::vector<ToyText>& ts, const std::vector<Vec>& gs) {
            for (std::size_t n = 0; n < ts.size(); ++n)
                for (std::size_t k = 0; k < p.shape.dim; ++k)
                    for (auto [f, x] : ts[n].pooled) grad->projection(k, f) += gs[n][k] * x;
        };
        backprop(q, cg.queries);
        backprop(pos, cg.positives);
        if (hard) backprop(neg, cg.hard_negatives);
    }
    if (opt.include_generative) loss.generative = toy_generative_loss(pos, p, grad);
    return loss;
}

/// Full-batch gradient descent; returns the objective before each step and after the last.
inline std::vector<double> train_toy(ToyParams& p, const TextBatch& data, const ObjectiveOptions& opt,
                                     std::size_t steps, double learning_rate) {
    require(learning_rate > 0, ErrorKind::Precondition, "learning rate must be > 0");
    std::vector<double> history;
    ToyGrad g;
    for (std::size_t s = 0; s < steps; ++s) {
        history.push_back(toy_objective(data, p, opt, &g).total());
        for (std::size_t i = 0; i < p.projection.data.size(); ++i)
            p.projection.data[i] -= learning_rate * g.projection.data[i];
        for (std::size_t i = 0; i < p.lm_head.data.size(); ++i) p.lm_head.data[i] -= learning_rate * g.lm_head.data[i];
    }
    history.push_back(toy_objective(data, p, opt).total());
    return history;
}

} // namespace rtlkit::embedcore
