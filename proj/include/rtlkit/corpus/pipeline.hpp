#pragma once

#include <algorithm>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rtlkit/common/io.hpp"
#include "rtlkit/common/parallel.hpp"
#include "rtlkit/corpus/dedup.hpp"
#include "rtlkit/corpus/filter.hpp"
#include "rtlkit/corpus/minhash.hpp"
#include "rtlkit/corpus/segment.hpp"
#include "rtlkit/corpus/syntax.hpp"

namespace rtlkit::corpus {

struct CorpusOptions {
    double max_comment_ratio = kDefaultMaxCommentRatio;
    std::size_t num_hashes = kDefaultNumHashes;
    std::size_t shingle_width = kDefaultShingleWidth;
    double jaccard_threshold = kDefaultJaccardThreshold;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct RejectedFile {
    std::string origin_path;
    std::string diagnostic;
};

/// One line of the keep/drop ledger.
struct LedgerEntry {
    std::string id;
    std::string origin_path;
    LineSpan line_span;
    std::string decision;  // Kept | CommentHeavy | Incomplete | SyntaxInvalid | Duplicate
    std::string detail;    // diagnostic, or path:line of the surviving duplicate
};

struct SegmentResult {
    std::vector<VerilogModule> modules;  // sorted by origin_path, then line_span
    std::vector<RejectedFile> rejected;
};

struct FilterResult {
    std::vector<VerilogModule> kept;
    std::vector<LedgerEntry> ledger;
};

struct DedupStageResult {
    std::vector<VerilogModule> kept;
    std::vector<LedgerEntry> ledger;
    DedupResult dedup;
};

inline std::vector<std::filesystem::path> list_verilog_files(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root))
        fail(ErrorKind::InvalidInput, "not a directory: " + root.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
        if (entry.is_regular_file() && entry.path().extension() == ".v")
            files.push_back(std::filesystem::relative(entry.path(), root));
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
    return files;
}

inline void sort_modules(std::vector<VerilogModule>& modules) {
    std::stable_sort(modules.begin(), modules.end(), [](const auto& a, const auto& b) {
        if (a.origin_path != b.origin_path) return a.origin_path < b.origin_path;
        return a.line_span.start < b.line_span.start;
    });
}

inline SegmentResult segment_tree(const std::filesystem::path& root, std::size_t jobs = 1) {
    const auto files = list_verilog_files(root);
    std::vector<std::vector<VerilogModule>> per_file(files.size());
    std::vector<std::string> errors(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        const auto rel = files[i].generic_string();
        try {
            per_file[i] = segment_file(read_file(root / files[i]), rel);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ParseError) throw;
            errors[i] = e.what();
        }
    });
    SegmentResult out;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!errors[i].empty()) out.rejected.push_back({files[i].generic_string(), errors[i]});
        for (auto& m : per_file[i]) out.modules.push_back(std::move(m));
    }
    sort_modules(out.modules);
    return out;
}

inline FilterResult filter_modules(std::vector<VerilogModule> modules, double max_comment_ratio,
                                   const SyntaxChecker* checker, std::size_t jobs = 1) {
    std::vector<FilterDecision> decisions(modules.size());
    parallel_for(modules.size(), jobs, [&](std::size_t i) {
        decisions[i] = quality_filter(modules[i], max_comment_ratio);
        if (decisions[i].keep && checker) syntax_check(modules[i], *checker);
    });
    FilterResult out;
    for (std::size_t i = 0; i < modules.size(); ++i) {
        auto& m = modules[i];
        LedgerEntry e{m.id, m.origin_path, m.line_span, std::string(to_string(decisions[i].reason)), ""};
        if (decisions[i].keep && m.syntax && !m.syntax->valid) {
            e.decision = "SyntaxInvalid";
            e.detail = m.syntax->diagnostic;
        }
        out.ledger.push_back(e);
        if (e.decision == "Kept") out.kept.push_back(std::move(m));
    }
    return out;
}

inline DedupStageResult dedup_modules(std::vector<VerilogModule> modules, const CorpusOptions& opt) {
    sort_modules(modules);
    std::vector<ShingleSignature> sigs(modules.size());
    parallel_for(modules.size(), opt.jobs, [&](std::size_t i) {
        sigs[i] = minhash_signature(modules[i], opt.num_hashes, opt.shingle_width, opt.seed);
    });
    DedupStageResult out;
    out.dedup = dedup(sigs, opt.jaccard_threshold);
    for (std::size_t i = 0; i < modules.size(); ++i) {
        auto& m = modules[i];
        if (auto s = out.dedup.survivor[i]; s >= 0) {
            out.ledger.push_back({m.id, m.origin_path, m.line_span, "Duplicate",
                                  modules[static_cast<std::size_t>(s)].origin_path + ":" +
                                      std::to_string(modules[static_cast<std::size_t>(s)].line_span.start)});
        } else {
            out.ledger.push_back({m.id, m.origin_path, m.line_span, "Kept", ""});
        }
    }
    for (std::size_t i = 0; i < modules.size(); ++i)
        if (out.dedup.survivor[i] < 0) out.kept.push_back(std::move(modules[i]));
    return out;
}

/// segment -> quality filter -> syntax check -> dedup, with a merged ledger in corpus order.
struct CorpusRun {
    std::vector<VerilogModule> modules;
    std::vector<LedgerEntry> ledger;
    std::vector<RejectedFile> rejected;
};

inline CorpusRun run_corpus(const std::filesystem::path& root, const CorpusOptions& opt,
                            const SyntaxChecker* checker) {
    auto seg = segment_tree(root, opt.jobs);
    auto filtered = filter_modules(std::move(seg.modules), opt.max_comment_ratio, checker, opt.jobs);
    auto deduped = dedup_modules(std::move(filtered.kept), opt);
    CorpusRun run;
    run.rejected = std::move(seg.rejected);
    run.modules = std::move(deduped.kept);
    std::size_t j = 0;
    for (auto& e : filtered.ledger) {
        if (e.decision == "Kept") run.ledger.push_back(deduped.ledger.at(j++));
        else run.ledger.push_back(std::move(e));
    }
    return run;
}

inline ordered_json to_json(const LedgerEntry& e) {
    ordered_json j;
    j["id"] = e.id;
    j["origin_path"] = e.origin_path;
    j["line_span"] = {e.line_span.start, e.line_span.end};
    j["decision"] = e.decision;
    j["detail"] = e.detail;
    return j;
}

inline ordered_json to_json(const RejectedFile& r) {
    ordered_json j;
    j["origin_path"] = r.origin_path;
    j["diagnostic"] = r.diagnostic;
    return j;
}

} // namespace rtlkit::corpus
