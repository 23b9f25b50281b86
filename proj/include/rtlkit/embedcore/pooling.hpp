#pragma once

#include <cstdint>
#include <vector>

#include "rtlkit/embedcore/linalg.hpp"

namespace rtlkit::embedcore {

struct TokenSequence {
    std::vector<std::uint32_t> tokens;
    Matrix hidden_states;  // one row per token
};

/// w_t = t / (1 + 2 + ... + T) for 1-based position t.
inline Vec position_weights(std::size_t T) {
    require(T >= 1, ErrorKind::Precondition, "pooling needs at least one token");
    const double total = static_cast<double>(T) * static_cast<double>(T + 1) / 2.0;
    Vec w(T);
    for (std::size_t t = 0; t < T; ++t) w[t] = static_cast<double>(t + 1) / total;
    return w;
}

inline Vec position_weighted_pool(const Matrix& hidden) {
    const auto w = position_weights(hidden.rows);
    require(all_finite(hidden.data), ErrorKind::NumericError, "non-finite hidden state");
    Vec out(hidden.cols, 0.0);
    for (std::size_t t = 0; t < hidden.rows; ++t)
        for (std::size_t k = 0; k < hidden.cols; ++k) out[k] += w[t] * hidden(t, k);
    return out;
}

inline Vec position_weighted_pool(const TokenSequence& seq) { return position_weighted_pool(seq.hidden_states); }

} // namespace rtlkit::embedcore
