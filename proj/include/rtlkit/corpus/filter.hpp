#pragma once

#include <string_view>

#include "rtlkit/common/error.hpp"
#include "rtlkit/corpus/module.hpp"

namespace rtlkit::corpus {

enum class FilterReason { Kept, CommentHeavy, Incomplete };

inline std::string_view to_string(FilterReason r) {
    switch (r) {
    case FilterReason::Kept: return "Kept";
    case FilterReason::CommentHeavy: return "CommentHeavy";
    case FilterReason::Incomplete: return "Incomplete";
    }
    return "?";
}

struct FilterDecision {
    bool keep = true;
    FilterReason reason = FilterReason::Kept;
};

inline constexpr double kDefaultMaxCommentRatio = 0.8;

/// Incomplete modules are reported as such even when they are also comment heavy.
inline FilterDecision quality_filter(const VerilogModule& module,
                                     double max_comment_ratio = kDefaultMaxCommentRatio) {
    require(max_comment_ratio > 0.0 && max_comment_ratio <= 1.0, ErrorKind::Precondition,
            "max_comment_ratio must lie in (0, 1]");
    if (!module.structurally_complete) return {false, FilterReason::Incomplete};
    if (module.comment_ratio > max_comment_ratio) return {false, FilterReason::CommentHeavy};
    return {true, FilterReason::Kept};
}

} // namespace rtlkit::corpus
