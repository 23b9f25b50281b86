#pragma once

#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/corpus/minhash.hpp"

namespace rtlkit::corpus {

struct DroppedDuplicate {
    std::string id;
    std::string duplicate_of;
    double estimated_jaccard = 0.0;
};

struct DedupResult {
    std::vector<std::string> kept;
    std::vector<DroppedDuplicate> dropped;
    /// Per input position: index of the surviving entry, or -1 when kept.
    std::vector<std::ptrdiff_t> survivor;
};

/// Greedy first-wins scan: an entry is dropped iff its estimated Jaccard with
/// some already-kept entry reaches `threshold`. The first such kept entry is
/// reported as the survivor.
inline DedupResult dedup(const std::vector<ShingleSignature>& corpus,
                         double threshold = kDefaultJaccardThreshold) {
    require(threshold > 0.0 && threshold <= 1.0, ErrorKind::Precondition,
            "jaccard threshold must lie in (0, 1]");
    DedupResult result;
    std::vector<std::size_t> kept;
    result.survivor.assign(corpus.size(), -1);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& sig = corpus[i];
        for (auto k : kept) {
            double j = estimated_jaccard(sig, corpus[k]);
            if (j >= threshold) {
                result.survivor[i] = static_cast<std::ptrdiff_t>(k);
                result.dropped.push_back({sig.module_id, corpus[k].module_id, j});
                break;
            }
        }
        if (result.survivor[i] < 0) {
            kept.push_back(i);
            result.kept.push_back(sig.module_id);
        }
    }
    return result;
}

} // namespace rtlkit::corpus
