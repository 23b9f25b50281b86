#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "rtlkit/annotate/annotate.hpp"
#include "rtlkit/common/parallel.hpp"

namespace rtlkit::annotate {

struct AnnotateOutcome {
    std::string module_id;
    bool complete = false;
    bool updated = false;
    std::string error_kind;  // empty on success
    std::string message;
};

/// Annotates every module, resuming from `existing`, on a bounded worker pool.
///
/// Updated records are appended to `out_path` in module order as soon as all
/// earlier modules have finished, so concurrent workers never interleave
/// writes and the file content does not depend on scheduling.
inline std::vector<AnnotateOutcome> annotate_corpus(const std::vector<corpus::VerilogModule>& modules,
                                                    std::map<std::string, AnnotationRecord>& existing,
                                                    ChatClient& client, const PromptLibrary& prompts,
                                                    const AnnotateConfig& cfg, std::size_t jobs,
                                                    const std::filesystem::path& out_path) {
    std::vector<AnnotationRecord> records(modules.size());
    std::vector<AnnotateOutcome> outcomes(modules.size());
    std::vector<bool> done(modules.size(), false);
    for (std::size_t i = 0; i < modules.size(); ++i) {
        auto it = existing.find(modules[i].id);
        records[i] = it != existing.end() ? it->second : AnnotationRecord{modules[i].id, {}, {}, {}, {}};
    }

    std::mutex commit_mutex;
    std::size_t next_commit = 0;
    auto commit = [&](std::size_t i) {
        std::lock_guard lock(commit_mutex);
        done[i] = true;
        while (next_commit < modules.size() && done[next_commit]) {
            if (outcomes[next_commit].updated && !out_path.empty())
                append_line(out_path, to_json(records[next_commit]).dump());
            ++next_commit;
        }
    };

    parallel_for(modules.size(), jobs, [&](std::size_t i) {
        auto& rec = records[i];
        auto& out = outcomes[i];
        out.module_id = modules[i].id;
        const AnnotationRecord before = rec;
        try {
            annotate_record(modules[i], rec, client, prompts, cfg);
        } catch (const Error& e) {
            out.error_kind = std::string(to_string(e.kind()));
            out.message = e.what();
        }
        out.updated = !(rec == before);
        out.complete = rec.complete();
        commit(i);
    });

    for (std::size_t i = 0; i < modules.size(); ++i) existing[modules[i].id] = records[i];
    return outcomes;
}

} // namespace rtlkit::annotate
