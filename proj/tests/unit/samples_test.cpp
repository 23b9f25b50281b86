#include <gtest/gtest.h>

#include <algorithm>

#include "rtlkit/common/random.hpp"
#include "rtlkit/samples/contrastive.hpp"
#include "rtlkit/samples/curriculum.hpp"

using namespace rtlkit;
using namespace rtlkit::samples;

namespace {

using S = ContrastiveSample;
constexpr auto C2T = SampleKind::CodeToText;
constexpr auto T2C = SampleKind::TextToCode;
constexpr auto C2C = SampleKind::CodeToCode;

/// Expansion tables written out per record type, for one equivalent E and one inequivalent I.
std::vector<S> table(RecordType t, const std::string& text, const std::string& code, const std::string& e,
                     const std::string& i) {
    switch (t) {
    case RecordType::A: return {{code, text, {}, C2T}, {text, code, {}, T2C}};
    case RecordType::B:
        return {{code, text, {}, C2T}, {text, code, {}, T2C}, {code, e, {}, C2C}, {e, code, {}, C2C}};
    case RecordType::C: return {{code, text, i, C2T}, {text, code, {}, T2C}};
    case RecordType::D:
        return {{code, text, i, C2T}, {text, code, {}, T2C}, {code, e, i, C2C}, {e, code, i, C2C}};
    }
    return {};
}

std::multiset<S> as_multiset(const std::vector<S>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST(Contrastive, TypeBOneEquivalent) {
    auto out = build_contrastive_samples({"adds", "module a; endmodule", {"module b; endmodule"}, {}, false});
    EXPECT_EQ(out.size(), 4u);
    EXPECT_TRUE(std::none_of(out.begin(), out.end(), [](const S& s) { return s.hard_negative.has_value(); }));
}

TEST(Contrastive, TypeCOneInequivalent) {
    auto out = build_contrastive_samples({"adds", "module a; endmodule", {}, {"module bad; endmodule"}, false});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].kind, C2T);
    EXPECT_EQ(out[0].hard_negative, "module bad; endmodule");
    EXPECT_FALSE(out[1].hard_negative);
}

TEST(Contrastive, TypeDOneOfEach) {
    SampleRecord r{"adds", "CODE", {"EQ"}, {"NE"}, false};
    auto out = build_contrastive_samples(r);
    EXPECT_EQ(out.size(), 4u);
    auto split = split_by_hardness(out);
    EXPECT_EQ(split.no_hard.size(), 1u);
    EXPECT_EQ(split.with_hard.size(), 3u);
    EXPECT_NE(std::find(out.begin(), out.end(), S{"EQ", "CODE", "NE", C2C}), out.end());
}

TEST(Contrastive, TypeAAndClassificationError) {
    EXPECT_EQ(build_contrastive_samples({"t", "c", {}, {}, true}).size(), 2u);
    try {
        build_contrastive_samples({"t", "c", {}, {}, false});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Classification);
    }
    EXPECT_THROW(build_contrastive_samples({"", "c", {}, {}, true}), Error);
    EXPECT_THROW(build_contrastive_samples({"same", "same", {}, {}, true}), Error);
}

TEST(Contrastive, IdentityRewriteIsNotAPositive) {
    auto out = build_contrastive_samples({"t", "CODE", {"CODE"}, {}, false});
    EXPECT_EQ(out.size(), 2u);
    for (const auto& s : out) EXPECT_NE(s.query, s.positive);
}

TEST(Contrastive, RandomRecordsMatchTables) {
    Rng rng(7);
    std::array<int, 4> seen{};
    for (int n = 0; n < 1000; ++n) {
        auto pick = rng.below(4);
        std::string text = "text " + std::to_string(n), code = "code " + std::to_string(n);
        std::string e = "eq " + std::to_string(rng.below(1000)), i = "ne " + std::to_string(rng.below(1000));
        SampleRecord r{text, code, {}, {}, pick == 0};
        if (pick == 1 || pick == 3) r.equivalent_codes.push_back(e);
        if (pick == 2 || pick == 3) r.inequivalent_codes.push_back(i);
        auto type = classify_record(r);
        ++seen[static_cast<std::size_t>(type)];
        EXPECT_EQ(static_cast<std::size_t>(type), pick);
        auto got = build_contrastive_samples(r);
        EXPECT_EQ(as_multiset(got), as_multiset(table(type, text, code, e, i))) << "record " << n;
        for (const auto& s : got) {
            EXPECT_NE(s.query, s.positive);
            if (s.hard_negative) {
                EXPECT_NE(*s.hard_negative, s.query);
                EXPECT_NE(*s.hard_negative, s.positive);
            }
        }
    }
    for (int c : seen) EXPECT_GT(c, 0);
}

TEST(Contrastive, MultipleRewritesExpandPerEquivalent) {
    Rng rng(11);
    for (int n = 0; n < 200; ++n) {
        std::size_t ne = rng.below(4), ni = rng.below(4);
        SampleRecord r{"t", "c", {}, {}, true};
        for (std::size_t k = 0; k < ne; ++k) r.equivalent_codes.push_back("e" + std::to_string(k));
        for (std::size_t k = 0; k < ni; ++k) r.inequivalent_codes.push_back("i" + std::to_string(k));
        auto out = build_contrastive_samples(r);
        EXPECT_EQ(out.size(), 2 + 2 * ne);
        auto split = split_by_hardness(out);
        EXPECT_EQ(split.with_hard.size(), ni ? 1 + 2 * ne : 0u);
        for (const auto& s : split.with_hard) EXPECT_EQ(*s.hard_negative, "i0");
        for (const auto& s : out)
            if (s.kind == T2C) EXPECT_FALSE(s.hard_negative);
    }
}

TEST(Contrastive, SplitIsAPartition) {
    Rng rng(3);
    std::vector<S> all;
    for (int n = 0; n < 100; ++n) {
        SampleRecord r{"t" + std::to_string(n), "c" + std::to_string(n), {}, {}, true};
        if (rng.below(2)) r.equivalent_codes.push_back("e" + std::to_string(n));
        if (rng.below(2)) r.inequivalent_codes.push_back("i" + std::to_string(n));
        for (auto& s : build_contrastive_samples(r)) all.push_back(s);
    }
    auto split = split_by_hardness(all);
    auto merged = split.no_hard;
    merged.insert(merged.end(), split.with_hard.begin(), split.with_hard.end());
    EXPECT_EQ(as_multiset(merged), as_multiset(all));
    for (const auto& s : split.no_hard) EXPECT_FALSE(s.hard_negative);
    for (const auto& s : split.with_hard) EXPECT_TRUE(s.hard_negative);
    EXPECT_TRUE(split_by_hardness({}).no_hard.empty());
    auto type_a = build_contrastive_samples({"t", "c", {}, {}, true});
    EXPECT_EQ(split_by_hardness(type_a).no_hard.size(), 2u);
}

TEST(Contrastive, JsonUsesQueryPosNegKeys) {
    S s{"q", "p", std::nullopt, C2T};
    EXPECT_EQ(to_json(s).dump(), R"({"query":"q","pos":"p","neg":null,"kind":"CodeToText"})");
    S h{"q", "p", "n", C2C};
    EXPECT_EQ(sample_from_json(json::parse(to_json(h).dump())), h);
}

namespace {

std::map<std::string, std::string> full_datasets() {
    return {{"line-level", "gen/lines.jsonl"},           {"module-with-specification", "gen/spec.jsonl"},
            {"module-with-high-level", "gen/high.jsonl"}, {"varying-prompts", "gen/prompts.jsonl"},
            {"embedding-no-hard", "emb/no_hard.jsonl"},   {"embedding-with-hard", "emb/with_hard.jsonl"}};
}

} // namespace

TEST(Curriculum, FullInputsGiveSixOrderedStages) {
    auto m = emit_curriculum(full_datasets(), default_hyperparameters());
    ASSERT_EQ(m.stages().size(), 6u);
    std::vector<std::string> names;
    for (const auto& s : m.stages()) names.push_back(s.name);
    EXPECT_EQ(names, (std::vector<std::string>{"line-level", "module-with-specification", "module-with-high-level",
                                               "varying-prompts", "embedding-no-hard", "embedding-with-hard"}));
    EXPECT_EQ(m.stages()[3].loss, LossKind::Generative);
    EXPECT_EQ(m.stages()[4].loss, LossKind::EmbeddingNoHard);
    EXPECT_EQ(m.stages()[5].loss, LossKind::EmbeddingWithHard);
    EXPECT_DOUBLE_EQ(m.metadata()["embedding_stage"]["temperature"].get<double>(), 0.02);
    EXPECT_DOUBLE_EQ(m.metadata()["embedding_stage"]["learning_rate"].get<double>(), 2e-5);
}

TEST(Curriculum, MissingLineLevelNamesTheStage) {
    auto d = full_datasets();
    d.erase("line-level");
    try {
        emit_curriculum(d, default_hyperparameters());
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line-level"), std::string::npos);
    }
    auto u = full_datasets();
    u["warmup"] = "x";
    EXPECT_THROW(emit_curriculum(u, {}), Error);
}

TEST(Curriculum, MetadataRoundTripsByteIdentically) {
    ordered_json hyper = default_hyperparameters();
    hyper["note"] = "zeta before alpha";
    hyper["alpha"] = 1;
    auto text = emit_curriculum(full_datasets(), hyper).to_json().dump(2);
    auto again = CurriculumManifest::from_json(ordered_json::parse(text)).to_json().dump(2);
    EXPECT_EQ(text, again);
}

TEST(Curriculum, ReorderedManifestIsRejected) {
    auto j = emit_curriculum(full_datasets(), {}).to_json();
    std::swap(j["stages"][4], j["stages"][5]);
    EXPECT_THROW(CurriculumManifest::from_json(j), Error);
    auto k = emit_curriculum(full_datasets(), {}).to_json();
    k["stages"][0]["loss"] = "EmbeddingNoHard";
    EXPECT_THROW(CurriculumManifest::from_json(k), Error);
}
