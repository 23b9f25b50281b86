#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/hash.hpp"
#include "rtlkit/corpus/lexer.hpp"
#include "rtlkit/corpus/module.hpp"

namespace rtlkit::corpus {

inline constexpr std::size_t kDefaultNumHashes = 128;
inline constexpr std::size_t kDefaultShingleWidth = 5;
inline constexpr double kDefaultJaccardThreshold = 0.85;

/// Pads short token streams so that at least one shingle exists.
inline constexpr std::string_view kPadToken = "\x01<pad>";

struct ShingleSignature {
    std::string module_id;
    std::size_t num_hashes = 0;
    std::size_t shingle_width = 0;
    std::vector<std::uint64_t> signature;

    bool operator==(const ShingleSignature&) const = default;
};

/// 64-bit hashes of all width-`w` token windows, in stream order.
inline std::vector<std::uint64_t> shingle_hashes(std::vector<std::string> tokens, std::size_t width) {
    require(width >= 1, ErrorKind::Precondition, "shingle width must be >= 1");
    while (tokens.size() < width) tokens.emplace_back(kPadToken);
    std::vector<std::uint64_t> out;
    out.reserve(tokens.size() - width + 1);
    for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t k = 0; k < width; ++k) {
            h = fnv1a64(tokens[i + k], h);
            h = fnv1a64(std::string_view("\x1f", 1), h);
        }
        out.push_back(h);
    }
    return out;
}

/// Signature over an explicit token stream; `module_id` is copied verbatim.
inline ShingleSignature minhash_tokens(const std::vector<std::string>& tokens, std::string module_id,
                                       std::size_t num_hashes, std::size_t shingle_width,
                                       std::uint64_t seed) {
    require(num_hashes >= 1, ErrorKind::Precondition, "num_hashes must be >= 1");
    const auto shingles = shingle_hashes(tokens, shingle_width);
    ShingleSignature sig{std::move(module_id), num_hashes, shingle_width,
                         std::vector<std::uint64_t>(num_hashes, std::numeric_limits<std::uint64_t>::max())};
    for (std::size_t i = 0; i < num_hashes; ++i) {
        const std::uint64_t salt = mix64(seed ^ mix64(0x5bd1e995ULL + i));
        std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
        for (auto s : shingles) best = std::min(best, mix64(s ^ salt));
        sig.signature[i] = best;
    }
    return sig;
}

/// Tokenizes with comments stripped (identifiers case-sensitive) and signs the module.
inline ShingleSignature minhash_signature(const VerilogModule& module,
                                          std::size_t num_hashes = kDefaultNumHashes,
                                          std::size_t shingle_width = kDefaultShingleWidth,
                                          std::uint64_t seed = 0) {
    return minhash_tokens(code_tokens(module.source_text), module.id, num_hashes, shingle_width, seed);
}

/// Fraction of equal slots.
inline double estimated_jaccard(const ShingleSignature& a, const ShingleSignature& b) {
    require(a.num_hashes == b.num_hashes && a.signature.size() == b.signature.size(),
            ErrorKind::Precondition, "signatures have different lengths");
    std::size_t equal = 0;
    for (std::size_t i = 0; i < a.signature.size(); ++i)
        if (a.signature[i] == b.signature[i]) ++equal;
    return static_cast<double>(equal) / static_cast<double>(a.signature.size());
}

} // namespace rtlkit::corpus
