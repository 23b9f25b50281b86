#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"

namespace rtlkit::samples {

enum class LossKind { Generative, EmbeddingNoHard, EmbeddingWithHard };

inline std::string_view to_string(LossKind k) {
    switch (k) {
    case LossKind::Generative: return "Generative";
    case LossKind::EmbeddingNoHard: return "EmbeddingNoHard";
    case LossKind::EmbeddingWithHard: return "EmbeddingWithHard";
    }
    return "?";
}

struct StageSpec {
    std::string_view name;
    LossKind loss;
    bool required;
};

/// The fixed stage sequence. Generative sub-stages come first, in this order,
/// followed by the embedding stages with hard negatives last.
inline constexpr std::array<StageSpec, 6> kStages{{
    {"line-level", LossKind::Generative, true},
    {"module-with-specification", LossKind::Generative, true},
    {"module-with-high-level", LossKind::Generative, true},
    {"varying-prompts", LossKind::Generative, true},
    {"embedding-no-hard", LossKind::EmbeddingNoHard, false},
    {"embedding-with-hard", LossKind::EmbeddingWithHard, false},
}};

struct CurriculumStage {
    std::string name;
    std::string dataset_path;
    LossKind loss;

    bool operator==(const CurriculumStage&) const = default;
};

/// Hyperparameters for the generative (first) stage.
inline ordered_json generative_stage_defaults() {
    ordered_json j;
    j["peft"] = "lora";
    j["batch_size"] = 4;
    j["gradient_accumulation_steps"] = 4;
    j["lr_scheduler_type"] = "cosine";
    j["warm_up_ratio"] = 0.1;
    j["learning_rate"] = 5e-5;
    j["num_train_epochs"] = 3;
    return j;
}

/// Hyperparameters for the joint embedding/generative (second) stage.
inline ordered_json embedding_stage_defaults() {
    ordered_json j;
    j["temperature"] = 0.02;
    j["learning_rate"] = 2e-5;
    j["finetuning"] = "full";
    j["embedding_batch_size"] = 4;
    j["generative_batch_size"] = 4;
    j["gradient_accumulation_steps"] = 8;
    j["lr_scheduler_type"] = "linear";
    j["warm_up_ratio"] = 0.03;
    j["num_train_epochs"] = 1;
    return j;
}

inline ordered_json default_hyperparameters() {
    ordered_json j;
    j["generative_stage"] = generative_stage_defaults();
    j["embedding_stage"] = embedding_stage_defaults();
    return j;
}

/// Ordered training stages. Instances only come from `emit_curriculum` or a
/// validated parse, so an out-of-order manifest cannot be built or written.
class CurriculumManifest {
public:
    static constexpr int kSchemaVersion = 1;

    const std::vector<CurriculumStage>& stages() const { return stages_; }
    const ordered_json& metadata() const { return metadata_; }

    ordered_json to_json() const {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        ordered_json stages = ordered_json::array();
        for (const auto& s : stages_) {
            ordered_json e;
            e["stage"] = s.name;
            e["dataset"] = s.dataset_path;
            e["loss"] = to_string(s.loss);
            stages.push_back(e);
        }
        j["stages"] = stages;
        j["metadata"] = metadata_;
        return j;
    }

    static CurriculumManifest from_json(const ordered_json& j) {
        try {
            require(j.at("schema_version").get<int>() == kSchemaVersion, ErrorKind::ParseError,
                    "unsupported curriculum schema version");
            std::map<std::string, std::string> datasets;
            std::vector<std::string> order;
            for (const auto& e : j.at("stages")) {
                auto name = e.at("stage").get<std::string>();
                order.push_back(name);
                datasets[name] = e.at("dataset").get<std::string>();
            }
            auto m = emit_curriculum_impl(datasets, j.at("metadata"));
            std::vector<std::string> expected;
            for (const auto& s : m.stages_) expected.push_back(s.name);
            require(order == expected, ErrorKind::ParseError, "curriculum stages out of order");
            for (std::size_t i = 0; i < m.stages_.size(); ++i)
                require(j["stages"][i].at("loss").get<std::string>() == to_string(m.stages_[i].loss),
                        ErrorKind::ParseError, "curriculum stage " + order[i] + " has the wrong loss kind");
            return m;
        } catch (const json::exception& e) {
            fail(ErrorKind::ParseError, std::string("bad curriculum manifest: ") + e.what());
        }
    }

    friend CurriculumManifest emit_curriculum(const std::map<std::string, std::string>&, const ordered_json&);

private:
    static CurriculumManifest emit_curriculum_impl(const std::map<std::string, std::string>& datasets,
                                                   const ordered_json& hyper) {
        for (const auto& [name, path] : datasets) {
            bool known = false;
            for (const auto& s : kStages) known = known || s.name == name;
            require(known, ErrorKind::InvalidInput, "unknown curriculum stage: " + name);
        }
        CurriculumManifest m;
        for (const auto& s : kStages) {
            auto it = datasets.find(std::string(s.name));
            if (it == datasets.end()) {
                if (s.required) fail(ErrorKind::MissingStage, "missing dataset for stage " + std::string(s.name));
                continue;
            }
            m.stages_.push_back({std::string(s.name), it->second, s.loss});
        }
        require(hyper.is_object() || hyper.is_null(), ErrorKind::InvalidInput, "curriculum metadata must be an object");
        if (hyper.is_object()) m.metadata_ = hyper;
        return m;
    }

    CurriculumManifest() = default;
    std::vector<CurriculumStage> stages_;
    ordered_json metadata_ = ordered_json::object();
};

/// Builds the manifest from stage name -> dataset path. The four generative
/// stages are mandatory; embedding stages are included when given.
inline CurriculumManifest emit_curriculum(const std::map<std::string, std::string>& datasets,
                                          const ordered_json& hyper) {
    return CurriculumManifest::emit_curriculum_impl(datasets, hyper);
}

} // namespace rtlkit::samples
