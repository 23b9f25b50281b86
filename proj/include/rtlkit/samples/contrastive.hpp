#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"

namespace rtlkit::samples {

enum class SampleKind { CodeToText, TextToCode, CodeToCode };

inline std::string_view to_string(SampleKind k) {
    switch (k) {
    case SampleKind::CodeToText: return "CodeToText";
    case SampleKind::TextToCode: return "TextToCode";
    case SampleKind::CodeToCode: return "CodeToCode";
    }
    return "?";
}

inline SampleKind sample_kind_from_string(std::string_view s) {
    if (s == "CodeToText") return SampleKind::CodeToText;
    if (s == "TextToCode") return SampleKind::TextToCode;
    if (s == "CodeToCode") return SampleKind::CodeToCode;
    fail(ErrorKind::ParseError, "unknown sample kind: " + std::string(s));
}

struct ContrastiveSample {
    std::string query;
    std::string positive;
    std::optional<std::string> hard_negative;
    SampleKind kind = SampleKind::CodeToText;

    bool operator==(const ContrastiveSample&) const = default;
    auto operator<=>(const ContrastiveSample&) const = default;
};

/// One original design with its verified rewrites.
struct SampleRecord {
    std::string original_text;
    std::string original_code;
    std::vector<std::string> equivalent_codes;
    std::vector<std::string> inequivalent_codes;
    bool syntax_error_only = false;  // every rewrite failed to parse, or there were none to make
};

/// Which of the four expansion shapes a record falls into.
enum class RecordType { A, B, C, D };

namespace detail {

inline bool text_is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

inline std::vector<std::string> usable(const std::vector<std::string>& codes, const std::vector<std::string>& exclude) {
    std::vector<std::string> out;
    for (const auto& c : codes) {
        if (std::find(exclude.begin(), exclude.end(), c) != exclude.end()) continue;
        if (std::find(out.begin(), out.end(), c) != out.end()) continue;
        out.push_back(c);
    }
    return out;
}

} // namespace detail

/// Expands a record into contrastive samples.
///
/// Rewrites byte-identical to the original (or repeated) are ignored, as are
/// inequivalent codes that also appear as equivalent. Each equivalent rewrite
/// gets its own pair of code-to-code samples; the first inequivalent rewrite is
/// the hard negative wherever one is used.
inline std::vector<ContrastiveSample> build_contrastive_samples(const SampleRecord& r) {
    require(!detail::text_is_blank(r.original_text) && !detail::text_is_blank(r.original_code), ErrorKind::Precondition,
            "sample record needs both text and code");
    require(r.original_text != r.original_code, ErrorKind::InvalidInput, "sample record text equals its code");
    if (r.equivalent_codes.empty() && r.inequivalent_codes.empty() && !r.syntax_error_only)
        fail(ErrorKind::Classification, "record has no verified rewrites and is not marked syntax-error-only");

    const auto eqs = detail::usable(r.equivalent_codes, {r.original_code, r.original_text});
    auto excluded = eqs;
    excluded.push_back(r.original_code);
    excluded.push_back(r.original_text);
    const auto ineqs = detail::usable(r.inequivalent_codes, excluded);
    const std::optional<std::string> neg = ineqs.empty() ? std::nullopt : std::optional(ineqs.front());

    std::vector<ContrastiveSample> out;
    out.push_back({r.original_code, r.original_text, neg, SampleKind::CodeToText});
    out.push_back({r.original_text, r.original_code, std::nullopt, SampleKind::TextToCode});
    for (const auto& e : eqs) {
        out.push_back({r.original_code, e, neg, SampleKind::CodeToCode});
        out.push_back({e, r.original_code, neg, SampleKind::CodeToCode});
    }
    return out;
}

inline RecordType classify_record(const SampleRecord& r) {
    const auto eqs = detail::usable(r.equivalent_codes, {r.original_code, r.original_text});
    auto excluded = eqs;
    excluded.push_back(r.original_code);
    excluded.push_back(r.original_text);
    bool eq = !eqs.empty();
    bool ineq = !detail::usable(r.inequivalent_codes, excluded).empty();
    if (eq && ineq) return RecordType::D;
    if (eq) return RecordType::B;
    if (ineq) return RecordType::C;
    return RecordType::A;
}

struct HardnessSplit {
    std::vector<ContrastiveSample> no_hard;
    std::vector<ContrastiveSample> with_hard;
};

inline HardnessSplit split_by_hardness(const std::vector<ContrastiveSample>& samples) {
    HardnessSplit s;
    for (const auto& x : samples) (x.hard_negative ? s.with_hard : s.no_hard).push_back(x);
    return s;
}

inline ordered_json to_json(const ContrastiveSample& s) {
    ordered_json j;
    j["query"] = s.query;
    j["pos"] = s.positive;
    j["neg"] = s.hard_negative ? ordered_json(*s.hard_negative) : ordered_json(nullptr);
    j["kind"] = to_string(s.kind);
    return j;
}

inline ContrastiveSample sample_from_json(const json& j) {
    try {
        ContrastiveSample s;
        s.query = j.at("query").get<std::string>();
        s.positive = j.at("pos").get<std::string>();
        if (!j.at("neg").is_null()) s.hard_negative = j.at("neg").get<std::string>();
        s.kind = sample_kind_from_string(j.at("kind").get<std::string>());
        return s;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("bad contrastive sample: ") + e.what());
    }
}

inline ordered_json to_json(const SampleRecord& r) {
    ordered_json j;
    j["original_text"] = r.original_text;
    j["original_code"] = r.original_code;
    j["equivalent_codes"] = r.equivalent_codes;
    j["inequivalent_codes"] = r.inequivalent_codes;
    j["syntax_error_only"] = r.syntax_error_only;
    return j;
}

inline SampleRecord sample_record_from_json(const json& j) {
    try {
        SampleRecord r;
        r.original_text = j.at("original_text").get<std::string>();
        r.original_code = j.at("original_code").get<std::string>();
        r.equivalent_codes = j.value("equivalent_codes", std::vector<std::string>{});
        r.inequivalent_codes = j.value("inequivalent_codes", std::vector<std::string>{});
        r.syntax_error_only = j.value("syntax_error_only", false);
        return r;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("bad sample record: ") + e.what());
    }
}

} // namespace rtlkit::samples
