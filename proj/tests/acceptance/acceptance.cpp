// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
// usage: acceptance PATH_TO_RTLKIT_BINARY
// Set RTLKIT_KEEP_WORK to keep the scratch directory for inspection.

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "rtlkit/annotate/chat_client.hpp"
#include "rtlkit/common/subprocess.hpp"
#include "rtlkit/corpus/lexer.hpp"
#include "rtlkit/corpus/pipeline.hpp"
#include "rtlkit/embedcore/toy_encoder.hpp"
#include "rtlkit/evalkit/passk.hpp"
#include "rtlkit/evalkit/regression.hpp"
#include "rtlkit/evalkit/retrieval.hpp"
#include "rtlkit/perfpred/gbt.hpp"
#include "rtlkit/rewrite/benchmark.hpp"
#include "rtlkit/samples/contrastive.hpp"

namespace fs = std::filesystem;
using namespace rtlkit;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    double limit_seconds = 0;  // 0 means no runtime bound

    void check(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string fmt(double x, int precision = 6) {
    std::ostringstream s;
    s.precision(precision);
    s << x;
    return s.str();
}

// ---------------------------------------------------------------- pass@k

Outcome passk_exactness() {
    Outcome o;
    o.limit_seconds = 10;
    std::size_t cases = 0;
    double worst = 0;
    for (unsigned n = 1; n <= 30; ++n)
        for (unsigned c = 0; c <= n; ++c)
            for (unsigned k = 1; k <= n; ++k) {
                const double want = oracle::pass_at_k(n, c, k).convert_to<double>();
                const double err = std::abs(evalkit::pass_at_k(n, c, k) - want);
                worst = std::max(worst, err);
                ++cases;
                o.check(err <= 1e-12, "n=" + std::to_string(n) + " c=" + std::to_string(c) + " k=" +
                                          std::to_string(k) + " off by " + fmt(err));
            }
    Rng rng(20240);
    const unsigned draws = 100000;
    double worst_sigma = 0;
    for (int t = 0; t < 20; ++t) {
        const unsigned n = 2 + static_cast<unsigned>(rng.below(29));
        const unsigned c = static_cast<unsigned>(rng.below(n + 1));
        const unsigned k = 1 + static_cast<unsigned>(rng.below(n));
        const double p = evalkit::pass_at_k(n, c, k);
        const double mc = oracle::pass_at_k_monte_carlo(n, c, k, draws, rng);
        const double sigma = std::sqrt(p * (1 - p) / draws);
        const double z = sigma > 0 ? std::abs(mc - p) / sigma : (mc == p ? 0.0 : INFINITY);
        worst_sigma = std::max(worst_sigma, z);
        o.check(z <= 3, "Monte-Carlo n=" + std::to_string(n) + " c=" + std::to_string(c) + " k=" + std::to_string(k) +
                            " deviates by " + fmt(z) + " sigma");
    }
    if (o.pass)
        o.detail = std::to_string(cases) + " cases, max error " + fmt(worst) + "; 20 Monte-Carlo cases within " +
                   fmt(worst_sigma, 3) + " sigma";
    return o;
}

// ---------------------------------------------------------------- rrse

Outcome rrse_identity() {
    Outcome o;
    Rng rng(5);
    double worst = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 2 + rng.below(300);
        const double scale = std::exp(rng.uniform(-3, 5)), noise = rng.uniform(0.0, 2.0);
        std::vector<double> y, yhat;
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0;
            while (v == 0) v = scale * (1 + rng.normal());
            y.push_back(v);
            yhat.push_back(v + noise * scale * rng.normal());
        }
        if (y == std::vector<double>(n, y[0])) continue;
        const auto m = evalkit::regression_metrics(y, yhat);
        if (m.r2_score > 1) continue;
        const double err = std::abs(m.rrse - std::sqrt(1 - m.r2_score));
        worst = std::max(worst, err);
        o.check(err <= 1e-12, "trial " + std::to_string(t) + " off by " + fmt(err));
    }
    const double reference_r2 = 0.603, reference_rrse = 0.630;
    const double implied = std::sqrt(1 - reference_r2);
    o.check(std::abs(implied - reference_rrse) <= 0.001,
            "reference pair inconsistent: sqrt(1-0.603) = " + fmt(implied));
    if (o.pass)
        o.detail = "500 random regressions, max error " + fmt(worst) + "; sqrt(1 - 0.603) = " + fmt(implied, 5) +
                   " vs 0.630";
    return o;
}

// ---------------------------------------------------------------- gradients

double relative_gradient_error(const std::function<double(const embedcore::ToyParams&)>& loss,
                               const embedcore::ToyGrad& g, embedcore::ToyParams p) {
    const double h = 1e-5;
    double diff = 0, scale = 0;
    auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + h;
            const double up = loss(p);
            params[i] = saved - h;
            const double down = loss(p);
            params[i] = saved;
            const double numeric = (up - down) / (2 * h);
            diff += (numeric - analytic[i]) * (numeric - analytic[i]);
            scale += std::max(numeric * numeric, analytic[i] * analytic[i]);
        }
    };
    probe(p.projection.data, g.projection.data);
    probe(p.lm_head.data, g.lm_head.data);
    return scale > 0 ? std::sqrt(diff / scale) : 0.0;
}

Outcome gradient_check() {
    using namespace embedcore;
    Outcome o;
    o.limit_seconds = 30;
    const std::vector<std::string> words{"add",   "sum",   "carry", "count", "reset", "clock", "mux",  "select",
                                         "shift", "left",  "right", "latch", "flag",  "bits",  "wide", "output",
                                         "input", "state", "next",  "wire",  "reg",   "xor",   "and",  "or"};
    const ToyShape shape{48, 5, 16};
    Rng rng(31);
    auto sentence = [&] {
        std::string s;
        const std::size_t len = 2 + rng.below(4);
        for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + words[rng.below(words.size())];
        return s;
    };
    double worst = 0;
    for (int b = 0; b < 20; ++b) {
        TextBatch batch;
        const std::size_t m = 2 + rng.below(3);
        for (std::size_t i = 0; i < m; ++i) {
            batch.queries.push_back(sentence());
            batch.positives.push_back(sentence());
            batch.negatives.push_back(sentence());
        }
        const auto params = ToyParams::init(1000 + static_cast<std::uint64_t>(b), shape, 0.5);
        const double tau = rng.uniform(0.05, 1.0);

        const ObjectiveOptions l1{EmbeddingObjective::NoHard, tau, false};
        const ObjectiveOptions l2{EmbeddingObjective::WithHard, tau, false};
        ToyGrad g1, g2, gg;
        const double v1 = toy_objective(batch, params, l1, &g1).total();
        const double v2 = toy_objective(batch, params, l2, &g2).total();
        std::vector<ToyText> positives;
        for (const auto& t : batch.positives) positives.push_back(tokenize_toy(t, shape));
        gg = ToyGrad{Matrix(shape.dim, shape.features), Matrix(shape.vocab, shape.dim)};
        toy_generative_loss(positives, params, &gg);

        const double e1 = relative_gradient_error(
            [&](const ToyParams& p) { return toy_objective(batch, p, l1).total(); }, g1, params);
        const double e2 = relative_gradient_error(
            [&](const ToyParams& p) { return toy_objective(batch, p, l2).total(); }, g2, params);
        const double eg = relative_gradient_error(
            [&](const ToyParams& p) { return toy_generative_loss(positives, p, nullptr); }, gg, params);
        worst = std::max({worst, e1, e2, eg});
        const std::string tag = "batch " + std::to_string(b) + ": ";
        o.check(e1 < 1e-4, tag + "L_emb1 gradient error " + fmt(e1));
        o.check(e2 < 1e-4, tag + "L_emb2 gradient error " + fmt(e2));
        o.check(eg < 1e-4, tag + "L_gen gradient error " + fmt(eg));
        o.check(v2 >= v1, tag + "L_emb2 " + fmt(v2) + " < L_emb1 " + fmt(v1));
    }
    if (o.pass) o.detail = "20 batches, max relative error " + fmt(worst, 3) + ", L_emb2 >= L_emb1 on all";
    return o;
}

// ---------------------------------------------------------------- contrastive samples

Outcome contrastive_tables() {
    using namespace samples;
    using S = ContrastiveSample;
    constexpr auto C2T = SampleKind::CodeToText, T2C = SampleKind::TextToCode, C2C = SampleKind::CodeToCode;
    Outcome o;
    Rng rng(1000);
    std::map<RecordType, int> seen;
    for (int n = 0; n < 1000; ++n) {
        const auto pick = rng.below(4);
        const std::string text = "describe " + std::to_string(n), code = "module m" + std::to_string(n) + ";";
        const std::string e = "module eq" + std::to_string(rng.below(100000)) + ";";
        const std::string i = "module ne" + std::to_string(rng.below(100000)) + ";";
        SampleRecord r{text, code, {}, {}, pick == 0};
        if (pick == 1 || pick == 3) r.equivalent_codes.push_back(e);
        if (pick == 2 || pick == 3) r.inequivalent_codes.push_back(i);

        const RecordType expected_type[] = {RecordType::A, RecordType::B, RecordType::C, RecordType::D};
        const std::map<RecordType, std::vector<S>> table{
            {RecordType::A, {{code, text, {}, C2T}, {text, code, {}, T2C}}},
            {RecordType::B, {{code, text, {}, C2T}, {text, code, {}, T2C}, {code, e, {}, C2C}, {e, code, {}, C2C}}},
            {RecordType::C, {{code, text, i, C2T}, {text, code, {}, T2C}}},
            {RecordType::D, {{code, text, i, C2T}, {text, code, {}, T2C}, {code, e, i, C2C}, {e, code, i, C2C}}},
        };
        const auto type = classify_record(r);
        ++seen[type];
        o.check(type == expected_type[pick], "record " + std::to_string(n) + " classified wrongly");
        const auto got = build_contrastive_samples(r);
        const auto& want = table.at(expected_type[pick]);
        o.check(std::multiset<S>(got.begin(), got.end()) == std::multiset<S>(want.begin(), want.end()),
                "record " + std::to_string(n) + " expansion differs from table");
    }
    o.check(seen.size() == 4, "not every record type was drawn");
    if (o.pass)
        o.detail = "1000 records (A " + std::to_string(seen[RecordType::A]) + ", B " +
                   std::to_string(seen[RecordType::B]) + ", C " + std::to_string(seen[RecordType::C]) + ", D " +
                   std::to_string(seen[RecordType::D]) + ") match the tables";
    return o;
}

// ---------------------------------------------------------------- rewrite state machine

Outcome rewrite_state_machine(const fs::path& work) {
    using namespace rewrite;
    Outcome o;
    const auto module = corpus::segment_file("module adder(input [3:0] a, input [3:0] b, output [4:0] s);\n"
                                             "  assign s = a + b;\nendmodule",
                                             "adder.v")
                            .at(0);
    const annotate::AnnotationRecord notes{module.id, std::vector<annotate::LineComment>{},
                                           "Functionality: adds.\nImplementation: assign.", "Adds two numbers.",
                                           "add two numbers"};
    const auto prompts = annotate::PromptLibrary::load(RTLKIT_PROMPT_DIR);
    const std::map<Verdict, InstructionKind> follows{{Verdict::Equivalent, InstructionKind::AfterEquivalent},
                                                     {Verdict::Inequivalent, InstructionKind::AfterInequivalent},
                                                     {Verdict::SyntaxError, InstructionKind::AfterSyntaxError}};
    const Verdict all[] = {Verdict::Equivalent, Verdict::Inequivalent, Verdict::SyntaxError};

    std::vector<std::vector<Verdict>> sequences;
    for (std::size_t len = 1; len <= 3; ++len) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < len; ++i) total *= 3;
        for (std::size_t code = 0; code < total; ++code) {
            std::vector<Verdict> seq;
            for (std::size_t i = 0, c = code; i < len; ++i, c /= 3) seq.push_back(all[c % 3]);
            sequences.push_back(seq);
        }
    }

    std::vector<RewritePair> replayed_pairs;
    std::size_t sid = 0;
    for (const auto& seq : sequences) {
        const auto dir = work / ("session" + std::to_string(sid++));
        fs::remove_all(dir);
        RewriteConfig cfg;
        cfg.rounds = seq.size();
        int n = 0;
        annotate::FunctionChatClient live([&](const annotate::ChatRequest&) {
            return "module adder(input [3:0] a, input [3:0] b, output [4:0] s);\n  assign s = b + a; // v" +
                   std::to_string(sid) + "." + std::to_string(++n) + "\nendmodule";
        });
        std::deque<Verdict> script(seq.begin(), seq.end());
        FunctionLecChecker scripted([&](const std::string&, const std::string&) {
            auto v = script.front();
            script.pop_front();
            return v;
        });
        {
            auto chat_t = Transcript::for_recording(dir / "chat.jsonl");
            auto lec_t = Transcript::for_recording(dir / "lec.jsonl");
            annotate::RecordingChatClient chat(live, chat_t);
            RecordingLecChecker lec(scripted, lec_t);
            run_rewrite_loop(module, notes, chat, lec, prompts, cfg);
        }
        auto chat_t = Transcript::for_replay(dir / "chat.jsonl");
        auto lec_t = Transcript::for_replay(dir / "lec.jsonl");
        annotate::ReplayChatClient chat(chat_t);
        ReplayLecChecker lec(lec_t);
        const auto chain = run_rewrite_loop(module, notes, chat, lec, prompts, cfg);

        std::vector<InstructionKind> expected{InstructionKind::Initial};
        for (std::size_t r = 0; r + 1 < seq.size(); ++r) expected.push_back(follows.at(seq[r]));
        std::vector<InstructionKind> got;
        for (const auto& p : chain.pairs) got.push_back(p.instruction_kind);
        std::string name;
        for (auto v : seq) name += std::string(to_string(v)) + " ";
        o.check(!chain.failure, "session [" + name + "] failed during replay");
        o.check(got == expected, "session [" + name + "] produced the wrong instruction kinds");
        for (std::size_t r = 0; r < chain.pairs.size() && r < seq.size(); ++r)
            o.check(chain.pairs[r].verdict == seq[r], "session [" + name + "] verdict not replayed");
        replayed_pairs.insert(replayed_pairs.end(), chain.pairs.begin(), chain.pairs.end());
    }

    std::set<std::string> syntax_rewrites;
    std::size_t usable = 0;
    for (const auto& p : replayed_pairs) {
        if (p.verdict == Verdict::SyntaxError) syntax_rewrites.insert(p.rewrite_text);
        else ++usable;
    }
    const auto bench =
        build_equivalence_benchmark(replayed_pairs, {{module.id, module.source_text}}, replayed_pairs.size());
    for (const auto& b : bench) o.check(!syntax_rewrites.count(b.code_b), "a SyntaxError rewrite reached the benchmark");
    o.check(bench.size() == usable, "benchmark has " + std::to_string(bench.size()) + " pairs, expected " +
                                        std::to_string(usable));
    if (o.pass)
        o.detail = std::to_string(sequences.size()) + " replayed sessions; benchmark keeps " +
                   std::to_string(bench.size()) + " pairs and none of the " + std::to_string(syntax_rewrites.size()) +
                   " SyntaxError rewrites";
    return o;
}

// ---------------------------------------------------------------- metric oracles

/// Exact pair-classification oracle with integer fractions, fast enough for
/// exhaustive enumeration up to eight pairs.
struct Fraction {
    long long num = 0, den = 1;
    bool operator<(const Fraction& o) const { return num * o.den < o.num * den; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct PairOracle {
    Fraction accuracy, f1, ap;
};

PairOracle pair_oracle(const std::vector<double>& sims, const std::vector<int>& labels) {
    const std::size_t n = sims.size();
    long long pos = 0;
    for (int l : labels) pos += l;
    PairOracle o{{0, 1}, {0, 1}, {0, 1}};
    bool first = true;
    std::vector<std::optional<double>> cuts{std::nullopt};
    for (double s : sims) cuts.push_back(s);
    for (const auto& cut : cuts) {
        long long tp = 0, fp = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (cut && sims[i] >= *cut) (labels[i] ? tp : fp)++;
        const long long fn = pos - tp, tn = static_cast<long long>(n) - pos - fp;
        const Fraction acc{tp + tn, static_cast<long long>(n)};
        const Fraction f1 = (2 * tp + fp + fn) ? Fraction{2 * tp, 2 * tp + fp + fn} : Fraction{0, 1};
        if (first || o.accuracy < acc) o.accuracy = acc;
        if (first || o.f1 < f1) o.f1 = f1;
        first = false;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
    const long long lcm = 840;  // lcm(1..8)
    long long tp = 0;
    for (std::size_t r = 0; r < n; ++r)
        if (labels[order[r]]) o.ap.num += ++tp * (lcm / static_cast<long long>(r + 1));
    o.ap.den = lcm * pos;
    return o;
}

Outcome metric_oracles() {
    using namespace evalkit;
    Outcome o;
    std::size_t pair_instances = 0, bitext_instances = 0;

    const double grid[] = {0.1, 0.5, 0.9};
    for (std::size_t n = 2; n <= 8; ++n) {
        std::size_t combos = 1;
        for (std::size_t i = 0; i < n; ++i) combos *= 3;
        std::vector<double> sims(n);
        std::vector<int> labels(n);
        std::vector<ScoredPair> pairs(n);
        for (std::size_t s = 0; s < combos && o.pass; ++s)
            for (std::size_t mask = 1; mask + 1 < (1u << n); ++mask) {
                for (std::size_t i = 0, code = s; i < n; ++i, code /= 3) {
                    sims[i] = grid[code % 3];
                    labels[i] = static_cast<int>((mask >> i) & 1);
                    pairs[i] = {sims[i], labels[i]};
                }
                const auto got = pair_classification(pairs);
                const auto want = pair_oracle(sims, labels);
                ++pair_instances;
                o.check(got.accuracy == want.accuracy.value() && got.f1 == want.f1.value() &&
                            got.average_precision == want.ap.value(),
                        "pair classification differs at n=" + std::to_string(n) + " sims#" + std::to_string(s) +
                            " labels#" + std::to_string(mask));
                if (!o.pass) break;
            }
    }

    // Equal-norm integer vectors make cosine order equal to dot-product order.
    const std::vector<oracle::IntVec> vecs{{5, 0}, {3, 4}, {-3, 4}};
    for (std::size_t total = 2; total <= 8 && o.pass; ++total)
        for (std::size_t a = 1; a < total && o.pass; ++a) {
            const std::size_t b = total - a, paired = std::min(a, b);
            std::size_t combos = 1;
            for (std::size_t i = 0; i < total; ++i) combos *= vecs.size();
            for (std::size_t s = 0; s < combos && o.pass; ++s) {
                std::vector<oracle::IntVec> q, c;
                embedcore::EmbeddingMatrix qm, cm;
                for (std::size_t i = 0, code = s; i < total; ++i, code /= vecs.size()) {
                    const auto v = vecs[code % vecs.size()];
                    (i < a ? q : c).push_back(v);
                    (i < a ? qm : cm).push_back(std::vector<double>{double(v.x), double(v.y)});
                }
                for (std::size_t shift = 0; shift < 2; ++shift)
                    for (std::size_t gmask = 0; gmask < (1u << paired); ++gmask) {
                        std::map<std::size_t, std::size_t> gold;
                        for (std::size_t i = 0; i < paired; ++i)
                            if ((gmask >> i) & 1) gold[i] = (i + shift) % b;
                        const auto got = bitext_mine(qm, cm, gold);
                        const auto want = oracle::bitext(q, c, gold);
                        ++bitext_instances;
                        o.check(got.predictions == want.predictions &&
                                    got.precision == want.precision.convert_to<double>() &&
                                    got.recall == want.recall.convert_to<double>() &&
                                    got.f1 == want.f1.convert_to<double>(),
                                "bitext differs with " + std::to_string(a) + " queries and " + std::to_string(b) +
                                    " candidates: got P/R/F1 " + fmt(got.precision, 17) + "/" + fmt(got.recall, 17) +
                                    "/" + fmt(got.f1, 17) + ", oracle " +
                                    fmt(want.precision.convert_to<double>(), 17) + "/" +
                                    fmt(want.recall.convert_to<double>(), 17) + "/" +
                                    fmt(want.f1.convert_to<double>(), 17));
                    }
            }
        }

    const double ap = average_precision({{0.9, 1}, {0.8, 0}, {0.3, 1}});
    o.check(ap == 5.0 / 6.0, "AP example gives " + fmt(ap, 17) + ", not 5/6");
    if (o.pass)
        o.detail = std::to_string(pair_instances) + " pair-classification and " + std::to_string(bitext_instances) +
                   " bitext instances match; AP example = 5/6 exactly";
    return o;
}

// ---------------------------------------------------------------- corpus fixture

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (auto tab = line.find('\t'); tab != std::string::npos; tab = line.find('\t', start)) {
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        cols.push_back(line.substr(start));
        rows.push_back(cols);
    }
    return rows;
}

bool has_module_keyword(std::string_view text) {
    for (const auto& t : corpus::lex(text))
        if (t.kind == corpus::TokenKind::Identifier && (t.text(text) == "module" || t.text(text) == "macromodule"))
            return true;
    return false;
}

Outcome corpus_fixture() {
    Outcome o;
    const fs::path fixture = fs::path(RTLKIT_FIXTURE_DIR) / "corpus50";
    const fs::path tree = fixture / "tree";
    corpus::BuiltinSyntaxChecker checker;
    const auto run = corpus::run_corpus(tree, {}, &checker);

    std::map<std::pair<std::string, std::size_t>, std::pair<std::string, std::string>> got, want;
    for (const auto& e : run.ledger)
        got[{e.origin_path, e.line_span.start}] = {e.decision, e.decision == "Duplicate" ? e.detail : ""};
    for (const auto& r : read_tsv(fixture / "expected_ledger.tsv"))
        want[{r.at(0), std::stoul(r.at(1))}] = {r.at(2), r.size() > 3 ? r[3] : ""};
    o.check(run.ledger.size() == got.size(), "ledger has repeated entries");
    for (const auto& [key, w] : want) {
        auto it = got.find(key);
        const std::string where = key.first + ":" + std::to_string(key.second);
        o.check(it != got.end(), "ledger lacks " + where);
        if (it != got.end())
            o.check(it->second == w, where + " decided " + it->second.first + " " + it->second.second +
                                         ", expected " + w.first + " " + w.second);
    }
    for (const auto& [key, g] : got)
        o.check(want.count(key), "unexpected ledger entry " + key.first + ":" + std::to_string(key.second));

    const auto expected_rejected = read_tsv(fixture / "expected_rejected.tsv");
    std::set<std::string> rejected_paths;
    o.check(run.rejected.size() == expected_rejected.size(), "rejected " + std::to_string(run.rejected.size()) +
                                                                 " files, expected " +
                                                                 std::to_string(expected_rejected.size()));
    for (const auto& r : expected_rejected) {
        rejected_paths.insert(r.at(0));
        bool found = false;
        for (const auto& x : run.rejected)
            found = found || (x.origin_path == r[0] && x.diagnostic.find(r.at(1)) != std::string::npos);
        o.check(found, r[0] + " not rejected with '" + r[1] + "'");
    }

    std::size_t files = 0, modules = 0;
    for (const auto& rel : corpus::list_verilog_files(tree)) {
        ++files;
        const auto text = read_file(tree / rel);
        std::vector<corpus::VerilogModule> mods;
        try {
            mods = corpus::segment_file(text, rel.generic_string());
        } catch (const Error&) {
            o.check(rejected_paths.count(rel.generic_string()), rel.generic_string() + " failed to segment");
            continue;
        }
        std::size_t cursor = 0;
        for (const auto& m : mods) {
            ++modules;
            const auto at = text.find(m.source_text, cursor);
            const std::string where = rel.generic_string() + ":" + std::to_string(m.line_span.start);
            o.check(at != std::string::npos, where + " module text not found in order");
            if (at == std::string::npos) break;
            const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + at, '\n'));
            o.check(line == m.line_span.start, where + " text begins on line " + std::to_string(line));
            o.check(!has_module_keyword(std::string_view(text).substr(cursor, at - cursor)),
                    where + " gap before module holds a module keyword");
            const auto again = corpus::segment_file(m.source_text, rel.generic_string());
            o.check(again.size() == 1 && again[0].source_text == m.source_text, where + " does not re-segment to itself");
            cursor = at + m.source_text.size();
        }
        o.check(!has_module_keyword(std::string_view(text).substr(std::min(cursor, text.size()))),
                rel.generic_string() + " trailing gap holds a module keyword");
    }
    if (o.pass)
        o.detail = std::to_string(want.size()) + " ledger rows and " + std::to_string(expected_rejected.size()) +
                   " rejected files match; round-trip holds for " + std::to_string(modules) + " modules in " +
                   std::to_string(files) + " files";
    return o;
}

// ---------------------------------------------------------------- GBT

Outcome gbt_regressor() {
    using namespace perfpred;
    Outcome o;
    o.limit_seconds = 20;
    Rng rng(3);
    RegressionDataset ds;
    for (std::size_t i = 0; i < 1000; ++i) {
        std::vector<double> x(16);
        for (auto& v : x) v = rng.uniform(-1, 1);
        ds.embeddings.push_back(x);
        const double x1 = ds.embeddings.row(i)[0];
        ds.area.push_back(3 * x1 + 0.01 * rng.normal());
        ds.delay.push_back(1.0);
        ds.ids.push_back(i);
    }
    auto [train, test] = split_80_20(ds, 11);
    std::vector<double> mse;
    const auto model = gbt_train(train, Target::Area, {}, &mse);
    std::vector<double> yhat = model.predict(test.embeddings);
    const auto scores = evalkit::regression_metrics(test.area, yhat);
    o.check(scores.r2_score >= 0.95, "test r2 " + fmt(scores.r2_score));
    std::size_t increases = 0;
    for (std::size_t t = 1; t < mse.size(); ++t) increases += mse[t] > mse[t - 1];
    o.check(increases == 0, std::to_string(increases) + " trees increased the training MSE");
    if (o.pass)
        o.detail = "test r2 " + fmt(scores.r2_score, 5) + ", train MSE non-increasing over " +
                   std::to_string(mse.size() - 1) + " trees (" + fmt(mse.front(), 3) + " -> " + fmt(mse.back(), 3) +
                   ")";
    return o;
}

// ---------------------------------------------------------------- CLI determinism

std::string completion(const std::string& text) {
    return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}}.dump();
}

std::string first_fenced_block(const std::string& s) {
    const std::string open = "```verilog\n";
    auto a = s.find(open);
    if (a == std::string::npos) return "";
    a += open.size();
    auto b = s.find("\n```", a);
    return s.substr(a, b == std::string::npos ? std::string::npos : b - a);
}

/// Deterministic stand-in for a chat completion service.
std::string fake_reply(const std::string& prompt) {
    if (prompt.find("Only add comments") != std::string::npos) return "```verilog\n" + first_fenced_block(prompt) + "\n```";
    if (prompt.find("exactly two sections") != std::string::npos)
        return "Functionality: transforms its inputs into outputs.\nImplementation: combinational and registered logic.";
    if (prompt.find("exactly one sentence") != std::string::npos) return "It implements a small digital block.";
    if (prompt.find("Answer with a single number") != std::string::npos) return "0.75";
    if (prompt.find("Keep the module name and the port list unchanged") != std::string::npos)
        return "```verilog\n" + first_fenced_block(prompt) + "\n// variant " + std::to_string(prompt.size() % 3) +
               "\n```";
    return "a small digital block that a designer could reuse";
}

std::map<std::string, std::string> hash_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = sha256_file(e.path());
    return out;
}

Outcome cli_determinism(const std::string& binary, const fs::path& work) {
    Outcome o;
    if (binary.empty() || !fs::exists(binary)) {
        o.check(false, "rtlkit binary not given or missing: " + binary);
        return o;
    }
    httplib::Server server;
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        res.set_content(completion(fake_reply(body.at("messages").at(0).at("content").get<std::string>())),
                        "application/json");
    });
    struct Stop {
        httplib::Server& s;
        std::thread& t;
        ~Stop() {
            s.stop();
            t.join();
        }
    } stop{server, listener};

    const auto tree = (fs::path(RTLKIT_FIXTURE_DIR) / "corpus50" / "tree").string();
    json config = {{"chat", {{"endpoint", "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"},
                             {"max_retries", 0},
                             {"api_key_env", ""}}},
                   {"rewrite", {{"lec_command", "sh lec.sh {golden} {gate}"}, {"rounds", 3}}},
                   {"embed", {{"toy_dim", 16}, {"toy_features", 256}, {"toy_vocab", 64}}},
                   {"perf", {{"num_trees", 20}, {"min_leaf", 2}}}};
    const std::string lec_script =
        "if grep -q 'variant 0' \"$2\"; then echo 'Equivalence successfully proven!';\n"
        "elif grep -q 'variant 1' \"$2\"; then echo \"Found 1 unproven \\$equiv cells in 'equiv_status -assert'\";\n"
        "else echo 'syntax error, unexpected end of file'; exit 1; fi\n";

    const std::vector<std::string> steps{
        "corpus segment --input " + tree + " --out seg",
        "corpus filter --modules seg/modules.jsonl --out filt",
        "corpus dedup --modules filt/modules.jsonl --out dd",
        "annotate run --modules dd/modules.jsonl --out ann --record ann/transcripts",
        "rewrite run --modules dd/modules.jsonl --annotations ann/annotations.jsonl --out rw",
        "samples build --modules dd/modules.jsonl --annotations ann/annotations.jsonl --rewrites rw/rewrites.jsonl"
        " --out smp",
        "samples schedule --stage line-level=smp/records.jsonl --stage module-with-specification=smp/records.jsonl"
        " --stage module-with-high-level=smp/records.jsonl --stage varying-prompts=smp/records.jsonl"
        " --stage embedding-no-hard=smp/contrastive_no_hard.jsonl"
        " --stage embedding-with-hard=smp/contrastive_with_hard.jsonl --out sched",
        "embed encode --texts dd/modules.jsonl --field source_text --out emb",
        "embed export --embeddings emb/embeddings.rte2 --out embx",
        "eval passk --trials trials.jsonl --k 1,5,10 --out ev_passk",
        "eval understand --pairs understanding.jsonl --semantic --out ev_und",
        "eval search --queries emb/embeddings.rte2 --candidates emb/embeddings.rte2 --out ev_search",
        "eval equiv --pairs rw/equiv_pairs.jsonl --out ev_equiv",
        "eval perf --predictions predictions.jsonl --out ev_perf",
        "perf split --dataset perf.csv --embeddings emb/embeddings.rte2 --out split",
        "perf train --dataset split/train.csv --embeddings emb/embeddings.rte2 --out model",
        "perf eval --model model/model_area.json --dataset split/test.csv --embeddings emb/embeddings.rte2"
        " --out perf_eval",
    };

    std::vector<fs::path> runs;
    for (int r = 0; r < 2 && o.pass; ++r) {
        const auto dir = work / ("run" + std::to_string(r));
        fs::remove_all(dir);
        fs::create_directories(dir);
        runs.push_back(dir);
        write_file(dir / "config.json", config.dump(2));
        write_file(dir / "lec.sh", lec_script);
        std::string trials, understanding, predictions;
        for (int i = 0; i < 6; ++i) {
            trials += json{{"problem_id", "p" + std::to_string(i)}, {"n", 10}, {"c", i}, {"c_syntax", i + 2},
                           {"temperature", i % 2 ? 0.2 : 0.8}}
                          .dump() +
                      "\n";
            understanding += json{{"candidate", "counts up by one on each clock " + std::to_string(i)},
                                  {"reference", "an up counter that increments every cycle " + std::to_string(i)}}
                                 .dump() +
                             "\n";
            predictions += json{{"y", 1.0 + i}, {"yhat", 1.1 + i * 0.9}}.dump() + "\n";
        }
        write_file(dir / "trials.jsonl", trials);
        write_file(dir / "understanding.jsonl", understanding);
        write_file(dir / "predictions.jsonl", predictions);

        for (const auto& step : steps) {
            if (step.rfind("perf split", 0) == 0) {
                std::size_t rows = 0;
                const auto modules = read_file(dir / "dd" / "modules.jsonl");
                for (const auto& line : text::split_lines(modules))
                    rows += !text::trim(line).empty();
                std::string csv = "id,area,delay\n";
                for (std::size_t i = 0; i < rows; ++i)
                    csv += std::to_string(i) + "," + std::to_string(10 + 3 * i) + "," + std::to_string(1 + (i % 7)) +
                           "\n";
                write_file(dir / "perf.csv", csv);
            }
            const auto cmd = "cd " + shell_quote(dir.string()) + " && " + shell_quote(binary) +
                             " --seed 7 --jobs 2 --config config.json " + step;
            const auto res = run_shell(cmd, 300);
            o.check(res.exit_code == 0, "run " + std::to_string(r) + " '" + step + "' exited " +
                                            std::to_string(res.exit_code) + ": " + res.out);
            if (!o.pass) break;
        }
    }
    if (!o.pass) return o;

    auto a = hash_tree(runs[0]), b = hash_tree(runs[1]);
    std::size_t manifests = 0, compared = 0;
    for (const auto& [rel, h] : a) {
        if (fs::path(rel).filename() == "manifest.json") {
            ++manifests;
            auto ma = json::parse(read_file(runs[0] / rel)), mb = json::parse(read_file(runs[1] / rel));
            ma.erase("wall_clock_seconds");
            mb.erase("wall_clock_seconds");
            o.check(ma == mb, rel + " differs between runs");
            for (const auto& dir : runs) {
                const auto res = run_shell("cd " + shell_quote(dir.string()) + " && " + shell_quote(binary) +
                                               " verify --manifest " + shell_quote(rel),
                                           60);
                o.check(res.exit_code == 0, "verify failed for " + (dir / rel).string() + ": " + res.out);
            }
            continue;
        }
        ++compared;
        o.check(b.count(rel) && b[rel] == h, rel + " differs between runs");
    }
    o.check(a.size() == b.size(), "runs produced different file sets");
    o.check(manifests == steps.size(), "expected one manifest per stage, found " + std::to_string(manifests));
    if (o.pass)
        o.detail = std::to_string(steps.size()) + " stages run twice: " + std::to_string(compared) +
                   " files identical, " + std::to_string(manifests) + " manifests equal up to wall-clock time and " +
                   "verified in both runs";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    const std::string binary = argc > 1 ? fs::absolute(argv[1]).string() : "";
    const fs::path work = fs::temp_directory_path() / ("rtlkit-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"pass@k exactness", passk_exactness},
        {"rrse identity", rrse_identity},
        {"gradient check", gradient_check},
        {"contrastive sample tables", contrastive_tables},
        {"rewrite state machine", [&] { return rewrite_state_machine(work / "rewrite"); }},
        {"metric oracles", metric_oracles},
        {"corpus pipeline fixture", corpus_fixture},
        {"GBT regressor", gbt_regressor},
        {"CLI determinism", [&] { return cli_determinism(binary, work / "cli"); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.pass && o.limit_seconds > 0 && secs > o.limit_seconds) {
            o.pass = false;
            o.detail = "took " + fmt(secs, 3) + " s, limit " + fmt(o.limit_seconds, 3) + " s";
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
                  << " (" << fmt(secs, 3) << " s)" << std::endl;
    }
    if (std::getenv("RTLKIT_KEEP_WORK")) std::cout << "work directory kept: " << work.string() << std::endl;
    else fs::remove_all(work);
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures ? 1 : 0;
}
