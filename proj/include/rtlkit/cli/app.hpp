#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rtlkit/annotate/pipeline.hpp"
#include "rtlkit/cli/context.hpp"
#include "rtlkit/corpus/pipeline.hpp"
#include "rtlkit/embedcore/rte2.hpp"
#include "rtlkit/evalkit/report.hpp"
#include "rtlkit/evalkit/semantic.hpp"
#include "rtlkit/perfpred/gbt.hpp"
#include "rtlkit/rewrite/benchmark.hpp"
#include "rtlkit/rewrite/loop.hpp"
#include "rtlkit/samples/contrastive.hpp"
#include "rtlkit/samples/curriculum.hpp"

namespace rtlkit::cli {

namespace commands {

inline std::vector<corpus::VerilogModule> read_modules(const std::filesystem::path& p) {
    std::vector<corpus::VerilogModule> out;
    for (const auto& row : read_jsonl(p)) out.push_back(corpus::module_from_json(row));
    return out;
}

inline void write_modules(const std::filesystem::path& p, const std::vector<corpus::VerilogModule>& ms) {
    std::vector<ordered_json> rows;
    for (const auto& m : ms) rows.push_back(corpus::to_json(m));
    write_jsonl(p, rows);
}

inline void write_ledger(const std::filesystem::path& p, const std::vector<corpus::LedgerEntry>& ledger) {
    std::vector<ordered_json> rows;
    for (const auto& e : ledger) rows.push_back(corpus::to_json(e));
    write_jsonl(p, rows);
}

inline corpus::CorpusOptions corpus_options(const RunContext& ctx) {
    corpus::CorpusOptions o;
    o.max_comment_ratio = ctx.cfg("corpus", "max_comment_ratio").get<double>();
    o.num_hashes = ctx.cfg("corpus", "num_hashes").get<std::size_t>();
    o.shingle_width = ctx.cfg("corpus", "shingle_width").get<std::size_t>();
    o.jaccard_threshold = ctx.cfg("corpus", "jaccard_threshold").get<double>();
    o.seed = ctx.seed();
    o.jobs = ctx.jobs();
    return o;
}

inline evalkit::MetricReport report_with(const ordered_json& metrics, const ordered_json& config) {
    evalkit::MetricReport r;
    r.metrics = metrics;
    r.config = config;
    return r;
}

inline void write_report(RunContext& ctx, const evalkit::MetricReport& r) {
    write_file(ctx.output("report.json"), r.to_json().dump(2) + "\n");
}

/// Exit status for a batch whose items may have failed individually.
inline int worst_exit(const std::vector<std::string>& kinds) {
    int worst = 0;
    for (const auto& name : kinds) {
        ErrorKind k;
        int code = error_kind_from_string(name, k) ? static_cast<int>(category_of(k)) : 1;
        worst = std::max(worst, code);
    }
    return worst;
}

inline int corpus_segment(RunContext& ctx, const std::string& input) {
    auto root = ctx.input(input);
    auto seg = corpus::segment_tree(root, ctx.jobs());
    write_modules(ctx.output("modules.jsonl"), seg.modules);
    std::vector<ordered_json> rejected;
    for (const auto& r : seg.rejected) rejected.push_back(corpus::to_json(r));
    write_jsonl(ctx.output("rejected.jsonl"), rejected);
    return 0;
}

inline int corpus_filter(RunContext& ctx, const std::string& modules_path) {
    auto modules = read_modules(ctx.input(modules_path));
    auto checker = ctx.syntax_checker();
    auto res = corpus::filter_modules(std::move(modules), ctx.cfg("corpus", "max_comment_ratio").get<double>(),
                                      checker.get(), ctx.jobs());
    write_modules(ctx.output("modules.jsonl"), res.kept);
    write_ledger(ctx.output("ledger.jsonl"), res.ledger);
    return 0;
}

inline int corpus_dedup(RunContext& ctx, const std::string& modules_path) {
    auto modules = read_modules(ctx.input(modules_path));
    const auto opt = corpus_options(ctx);
    auto res = corpus::dedup_modules(std::move(modules), opt);
    write_modules(ctx.output("modules.jsonl"), res.kept);
    write_ledger(ctx.output("ledger.jsonl"), res.ledger);
    ordered_json report;
    report["kept"] = res.dedup.kept.size();
    report["dropped"] = ordered_json::array();
    for (const auto& d : res.dedup.dropped)
        report["dropped"].push_back(
            ordered_json{{"id", d.id}, {"duplicate_of", d.duplicate_of}, {"estimated_jaccard", d.estimated_jaccard}});
    report["num_hashes"] = opt.num_hashes;
    report["shingle_width"] = opt.shingle_width;
    report["jaccard_threshold"] = opt.jaccard_threshold;
    report["seed"] = opt.seed;
    write_file(ctx.output("dedup_report.json"), report.dump(2) + "\n");
    return 0;
}

inline int annotate_run(RunContext& ctx, const std::string& modules_path, std::ostream& err) {
    auto modules = read_modules(ctx.input(modules_path));
    auto prompts = ctx.prompts();
    annotate::AnnotateConfig cfg;
    cfg.model = ctx.cfg("chat", "model").get<std::string>();
    cfg.temperature = ctx.cfg("chat", "temperature").get<double>();
    cfg.query_word_cap = ctx.cfg("annotate", "query_word_cap").get<std::size_t>();
    cfg.leak_retries = ctx.cfg("annotate", "leak_retries").get<int>();
    auto out_path = ctx.output("annotations.jsonl");
    auto existing = annotate::load_annotations(out_path);
    auto outcomes = annotate::annotate_corpus(modules, existing, ctx.chat(), prompts, cfg, ctx.jobs(), out_path);
    std::vector<ordered_json> failures;
    std::vector<std::string> kinds;
    for (const auto& o : outcomes)
        if (!o.error_kind.empty()) {
            failures.push_back(ordered_json{{"module_id", o.module_id}, {"error_kind", o.error_kind}, {"message", o.message}});
            kinds.push_back(o.error_kind);
            err << "annotate: " << o.module_id << ": " << o.error_kind << ": " << o.message << "\n";
        }
    if (!std::filesystem::exists(out_path)) write_file(out_path, "");
    write_jsonl(ctx.output("annotate_failures.jsonl"), failures);
    return worst_exit(kinds);
}

inline int rewrite_run(RunContext& ctx, const std::string& modules_path, const std::string& notes_path,
                       std::ostream& err) {
    auto modules = read_modules(ctx.input(modules_path));
    auto notes = annotate::load_annotations(ctx.input(notes_path));
    auto prompts = ctx.prompts();
    rewrite::RewriteConfig cfg;
    cfg.rounds = ctx.cfg("rewrite", "rounds").get<std::size_t>();
    cfg.model = ctx.cfg("chat", "model").get<std::string>();
    cfg.temperature = ctx.cfg("chat", "temperature").get<double>();
    auto& lec = ctx.lec();
    auto chains = rewrite::run_rewrite_corpus(
        modules, notes, ctx.chat(), [&](std::size_t) -> rewrite::LecChecker& { return lec; }, prompts, cfg,
        ctx.jobs());

    std::vector<rewrite::RewritePair> all;
    std::vector<ordered_json> pairs, failures;
    std::vector<std::string> kinds;
    for (const auto& c : chains) {
        for (const auto& p : c.pairs) {
            all.push_back(p);
            pairs.push_back(rewrite::to_json(p));
        }
        if (c.failure) {
            failures.push_back(rewrite::to_json(*c.failure));
            kinds.emplace_back(to_string(c.failure->kind));
            err << "rewrite: " << c.failure->original_id << ": " << to_string(c.failure->kind) << ": "
                << c.failure->message << "\n";
        }
    }
    std::map<std::string, std::string> originals;
    for (const auto& m : modules) originals[m.id] = m.source_text;
    auto bench = rewrite::build_equivalence_benchmark(all, originals, ctx.cfg("rewrite", "benchmark_cap").get<std::size_t>());
    std::vector<ordered_json> labeled;
    for (const auto& b : bench) labeled.push_back(rewrite::to_json(b));
    write_jsonl(ctx.output("rewrites.jsonl"), pairs);
    write_jsonl(ctx.output("rewrite_failures.jsonl"), failures);
    write_jsonl(ctx.output("equiv_pairs.jsonl"), labeled);
    return worst_exit(kinds);
}

/// Derives sample records from annotated modules and their rewrites: one
/// description record per module with rewrites, plus one code-search record
/// per module with a user query.
inline std::vector<samples::SampleRecord> derive_records(const std::vector<corpus::VerilogModule>& modules,
                                                         const std::map<std::string, annotate::AnnotationRecord>& notes,
                                                         const std::vector<rewrite::RewritePair>& pairs) {
    std::map<std::string, std::vector<const rewrite::RewritePair*>> by_id;
    for (const auto& p : pairs) by_id[p.original_id].push_back(&p);
    std::vector<samples::SampleRecord> out;
    for (const auto& m : modules) {
        auto it = notes.find(m.id);
        if (it == notes.end()) continue;
        const auto& n = it->second;
        const auto& text = n.high_level_description ? n.high_level_description : n.specification;
        auto pit = by_id.find(m.id);
        if (text && pit != by_id.end()) {
            samples::SampleRecord r{*text, m.source_text, {}, {}, false};
            bool syntax_error = false;
            for (const auto* p : pit->second) {
                if (p->verdict == rewrite::Verdict::Equivalent) r.equivalent_codes.push_back(p->rewrite_text);
                else if (p->verdict == rewrite::Verdict::Inequivalent) r.inequivalent_codes.push_back(p->rewrite_text);
                else syntax_error = true;
            }
            r.syntax_error_only = syntax_error && r.equivalent_codes.empty() && r.inequivalent_codes.empty();
            if (!r.equivalent_codes.empty() || !r.inequivalent_codes.empty() || r.syntax_error_only)
                out.push_back(std::move(r));
        }
        if (n.user_query) out.push_back({*n.user_query, m.source_text, {}, {}, true});
    }
    return out;
}

inline int samples_build(RunContext& ctx, const std::string& records_path, const std::string& modules_path,
                         const std::string& notes_path, const std::string& rewrites_path) {
    std::vector<samples::SampleRecord> records;
    if (!records_path.empty()) {
        for (const auto& row : read_jsonl(ctx.input(records_path))) records.push_back(samples::sample_record_from_json(row));
    } else {
        if (modules_path.empty() || notes_path.empty() || rewrites_path.empty())
            fail(ErrorKind::Usage, "samples build needs --records, or all of --modules, --annotations and --rewrites");
        auto modules = read_modules(ctx.input(modules_path));
        auto notes = annotate::load_annotations(ctx.input(notes_path));
        std::vector<rewrite::RewritePair> pairs;
        for (const auto& row : read_jsonl(ctx.input(rewrites_path))) pairs.push_back(rewrite::rewrite_pair_from_json(row));
        records = derive_records(modules, notes, pairs);
        std::vector<ordered_json> rows;
        for (const auto& r : records) rows.push_back(samples::to_json(r));
        write_jsonl(ctx.output("records.jsonl"), rows);
    }
    std::vector<samples::ContrastiveSample> all;
    for (const auto& r : records) {
        auto s = samples::build_contrastive_samples(r);
        all.insert(all.end(), s.begin(), s.end());
    }
    auto split = samples::split_by_hardness(all);
    auto dump = [&](const std::string& name, const std::vector<samples::ContrastiveSample>& v) {
        std::vector<ordered_json> rows;
        for (const auto& s : v) rows.push_back(samples::to_json(s));
        write_jsonl(ctx.output(name), rows);
    };
    dump("contrastive.jsonl", all);
    dump("contrastive_no_hard.jsonl", split.no_hard);
    dump("contrastive_with_hard.jsonl", split.with_hard);
    return 0;
}

inline int samples_schedule(RunContext& ctx, const std::vector<std::string>& stages, const std::string& hyper_path) {
    std::map<std::string, std::string> datasets;
    for (const auto& s : stages) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
            fail(ErrorKind::Usage, "--stage expects NAME=PATH, got '" + s + "'");
        const auto name = s.substr(0, eq), path = s.substr(eq + 1);
        require(!datasets.count(name), ErrorKind::Usage, "stage given twice: " + name);
        ctx.input(path);
        datasets[name] = path;
    }
    ordered_json hyper = samples::default_hyperparameters();
    if (!hyper_path.empty()) hyper = ordered_json::parse(read_file(ctx.input(hyper_path)));
    auto manifest = samples::emit_curriculum(datasets, hyper);
    write_file(ctx.output("curriculum.json"), manifest.to_json().dump(2) + "\n");
    return 0;
}

inline std::vector<std::string> read_texts(const std::filesystem::path& p, const std::string& field) {
    std::vector<std::string> out;
    std::size_t line = 0;
    for (const auto& row : read_jsonl(p)) {
        ++line;
        if (row.is_string()) out.push_back(row.get<std::string>());
        else if (row.is_object() && row.contains(field) && row[field].is_string()) out.push_back(row[field].get<std::string>());
        else fail(ErrorKind::InvalidInput, p.string() + ":" + std::to_string(line) + ": no string field '" + field + "'");
    }
    return out;
}

inline embedcore::EmbeddingMatrix embed_all(RunContext& ctx, const std::vector<std::string>& texts) {
    embedcore::EmbeddingMatrix m;
    if (texts.empty()) return m;
    for (const auto& v : ctx.embedder().embed(texts)) m.push_back(v);
    return m;
}

inline int embed_encode(RunContext& ctx, const std::string& texts_path, const std::string& field) {
    auto texts = read_texts(ctx.input(texts_path), field);
    require(!texts.empty(), ErrorKind::InvalidInput, "no texts to embed in " + texts_path);
    embedcore::write_rte2(ctx.output("embeddings.rte2"), embed_all(ctx, texts));
    return 0;
}

inline int embed_export(RunContext& ctx, const std::string& path) {
    auto m = embedcore::read_rte2(ctx.input(path));
    write_file(ctx.output("embeddings.jsonl"), embedcore::export_jsonl(m));
    return 0;
}

inline int eval_passk(RunContext& ctx, const std::string& trials_path, std::vector<std::size_t> ks) {
    if (ks.empty())
        for (const auto& k : ctx.cfg("eval", "k")) ks.push_back(k.get<std::size_t>());
    std::map<double, std::vector<evalkit::TrialRecord>> by_t;
    for (const auto& row : read_jsonl(ctx.input(trials_path)))
        by_t[row.value("temperature", 0.0)].push_back(evalkit::trial_from_json(row));
    auto rep = evalkit::pass_at_k_report(by_t, ks);
    ordered_json cfg;
    cfg["k"] = ks;
    cfg["temperatures"] = ordered_json::array();
    for (const auto& [t, _] : by_t) cfg["temperatures"].push_back(t);
    write_report(ctx, report_with(evalkit::to_json(rep), cfg));
    return 0;
}

inline int eval_understand(RunContext& ctx, const std::string& pairs_path, bool semantic) {
    std::vector<evalkit::TextPair> pairs;
    for (const auto& row : read_jsonl(ctx.input(pairs_path))) {
        try {
            pairs.push_back({row.at("candidate").get<std::string>(), row.at("reference").get<std::string>()});
        } catch (const json::exception&) {
            fail(ErrorKind::InvalidInput, pairs_path + ": each line needs string fields candidate and reference");
        }
    }
    auto metrics = evalkit::understanding_scores(pairs);
    ordered_json cfg;
    cfg["semantic"] = semantic;
    if (semantic) {
        auto prompts = ctx.prompts();
        evalkit::JudgeConfig jc{ctx.cfg("chat", "model").get<std::string>(), ctx.cfg("chat", "temperature").get<double>()};
        double sim = 0, judge = 0;
        for (const auto& p : pairs) {
            auto s = evalkit::semantic_scores(p.candidate, p.reference, ctx.embedder(), ctx.chat(), prompts, jc);
            sim += s.embedding_similarity;
            judge += s.gpt_score;
        }
        metrics["embedding_similarity"] = sim / static_cast<double>(pairs.size());
        metrics["gpt_score"] = judge / static_cast<double>(pairs.size());
        cfg["judge_model"] = jc.model;
        cfg["embed_backend"] = ctx.cfg("embed", "backend");
    }
    write_report(ctx, report_with(metrics, cfg));
    return 0;
}

inline int eval_search(RunContext& ctx, const std::string& q_path, const std::string& c_path,
                       const std::string& gold_path) {
    auto q = embedcore::read_rte2(ctx.input(q_path));
    auto c = embedcore::read_rte2(ctx.input(c_path));
    std::map<std::size_t, std::size_t> gold;
    if (gold_path.empty()) {
        for (std::size_t i = 0; i < std::min(q.count(), c.count()); ++i) gold[i] = i;
    } else {
        for (const auto& row : read_jsonl(ctx.input(gold_path)))
            gold[row.at("query").get<std::size_t>()] = row.at("candidate").get<std::size_t>();
    }
    auto s = evalkit::bitext_mine(q, c, gold);
    ordered_json cfg;
    cfg["queries"] = q.count();
    cfg["candidates"] = c.count();
    cfg["gold_pairs"] = gold.size();
    write_report(ctx, report_with(evalkit::to_json(s), cfg));
    return 0;
}

inline int eval_equiv(RunContext& ctx, const std::string& pairs_path) {
    auto rows = read_jsonl(ctx.input(pairs_path));
    std::vector<evalkit::ScoredPair> scored;
    std::vector<std::string> texts;
    bool from_code = false;
    for (const auto& row : rows) {
        if (row.contains("similarity")) {
            scored.push_back({row.at("similarity").get<double>(), row.at("label").get<int>()});
        } else if (row.contains("code_a") && row.contains("code_b")) {
            from_code = true;
            texts.push_back(row.at("code_a").get<std::string>());
            texts.push_back(row.at("code_b").get<std::string>());
        } else {
            fail(ErrorKind::InvalidInput, pairs_path + ": each line needs similarity, or code_a and code_b");
        }
    }
    require(!(from_code && !scored.empty()), ErrorKind::InvalidInput,
            pairs_path + ": mixes precomputed similarities with code pairs");
    if (from_code) {
        auto vs = ctx.embedder().embed(texts);
        require(vs.size() == texts.size(), ErrorKind::ClientFailure, "embed client returned the wrong number of vectors");
        for (std::size_t i = 0; i < rows.size(); ++i)
            scored.push_back({embedcore::cosine(vs[2 * i], vs[2 * i + 1]), rows[i].at("label").get<int>()});
    }
    auto pc = evalkit::pair_classification(scored);
    ordered_json cfg;
    cfg["pairs"] = scored.size();
    cfg["similarity_source"] = from_code ? "embedding" : "precomputed";
    write_report(ctx, report_with(evalkit::to_json(pc), cfg));
    return 0;
}

inline int eval_perf(RunContext& ctx, const std::string& predictions_path) {
    std::vector<double> y, yhat;
    for (const auto& row : read_jsonl(ctx.input(predictions_path))) {
        y.push_back(row.at("y").get<double>());
        yhat.push_back(row.at("yhat").get<double>());
    }
    auto s = evalkit::regression_metrics(y, yhat);
    ordered_json cfg;
    cfg["count"] = y.size();
    write_report(ctx, report_with(evalkit::to_json(s), cfg));
    return 0;
}

inline perfpred::GbtParams gbt_params(const RunContext& ctx) {
    perfpred::GbtParams p;
    p.num_trees = ctx.cfg("perf", "num_trees").get<std::size_t>();
    p.max_depth = ctx.cfg("perf", "max_depth").get<std::size_t>();
    p.shrinkage = ctx.cfg("perf", "shrinkage").get<double>();
    p.min_leaf = ctx.cfg("perf", "min_leaf").get<std::size_t>();
    p.jobs = ctx.jobs();
    return p;
}

inline int perf_split(RunContext& ctx, const std::string& csv, const std::string& emb) {
    auto ds = perfpred::load_dataset(ctx.input(csv), ctx.input(emb));
    auto [train, test] = perfpred::split_80_20(ds, ctx.seed());
    write_file(ctx.output("train.csv"), perfpred::write_perf_csv(train));
    write_file(ctx.output("test.csv"), perfpred::write_perf_csv(test));
    return 0;
}

inline int perf_train(RunContext& ctx, const std::string& csv, const std::string& emb, const std::string& target) {
    auto ds = perfpred::load_dataset(ctx.input(csv), ctx.input(emb));
    std::vector<perfpred::Target> targets;
    if (target == "both") targets = {perfpred::Target::Area, perfpred::Target::Delay};
    else targets = {perfpred::target_from_string(target)};
    const auto params = gbt_params(ctx);
    ordered_json history;
    for (auto t : targets) {
        std::vector<double> mse;
        auto model = perfpred::gbt_train(ds, t, params, &mse);
        write_file(ctx.output("model_" + perfpred::to_string(t) + ".json"), perfpred::to_json(model).dump() + "\n");
        history[perfpred::to_string(t)] = mse;
    }
    write_file(ctx.output("train_history.json"), history.dump() + "\n");
    return 0;
}

inline int perf_eval(RunContext& ctx, const std::string& model_path, const std::string& csv, const std::string& emb) {
    auto model = perfpred::gbt_model_from_json(read_json(ctx.input(model_path)));
    auto ds = perfpred::load_dataset(ctx.input(csv), ctx.input(emb));
    write_report(ctx, perfpred::gbt_evaluate(model, ds));
    return 0;
}

} // namespace commands

/// Runs one command line. Returns the process exit status:
/// 0 success, 1 domain error, 2 usage error, 3 infrastructure error.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"rtlkit: RTL corpus, annotation, rewriting, embedding and evaluation pipelines", "rtlkit"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", RTLKIT_VERSION);

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads for every pool")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--record", g.record_dir, "Record service exchanges into DIR");
    app.add_option("--replay", g.replay_dir, "Replay service exchanges from DIR");
    app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();

    std::function<int(RunContext&)> action;
    std::string chosen;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help) {
        auto* sub = parent->add_subcommand(name, help);
        sub->final_callback([&chosen, parent, name] { chosen = parent->get_name() + " " + name; });
        return sub;
    };
    auto group = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->require_subcommand(1);
        return sub;
    };

    struct Opts {
        std::string input, modules, annotations, rewrites, records, hyper, texts, field = "text", embeddings, trials,
            pairs, queries, candidates, gold, predictions, dataset, model, target = "both", manifest;
        std::vector<std::string> stages;
        std::vector<std::size_t> ks;
        bool semantic = false;
    } o;

    auto* corpus_cmd = group("corpus", "Segment, filter and deduplicate Verilog sources");
    auto* seg = leaf(corpus_cmd, "segment", "Split .v files under a directory into modules");
    seg->add_option("--input", o.input, "Directory of .v files")->required();
    auto* filt = leaf(corpus_cmd, "filter", "Drop comment-heavy, incomplete and unparsable modules");
    filt->add_option("--modules", o.modules, "modules.jsonl")->required();
    auto* dd = leaf(corpus_cmd, "dedup", "Drop near-duplicate modules");
    dd->add_option("--modules", o.modules, "modules.jsonl")->required();

    auto* ann_cmd = group("annotate", "Generate descriptions and queries with a chat model");
    auto* ann_run = leaf(ann_cmd, "run", "Annotate modules, resuming from OUT/annotations.jsonl");
    ann_run->add_option("--modules", o.modules, "modules.jsonl")->required();

    auto* rw_cmd = group("rewrite", "Equivalence-checked rewriting");
    auto* rw_run = leaf(rw_cmd, "run", "Run the rewrite loop and build the equivalence benchmark");
    rw_run->add_option("--modules", o.modules, "modules.jsonl")->required();
    rw_run->add_option("--annotations", o.annotations, "annotations.jsonl")->required();

    auto* smp_cmd = group("samples", "Contrastive samples and training curricula");
    auto* smp_build = leaf(smp_cmd, "build", "Expand records into contrastive samples");
    smp_build->add_option("--records", o.records, "Sample records (JSONL)");
    smp_build->add_option("--modules", o.modules, "modules.jsonl");
    smp_build->add_option("--annotations", o.annotations, "annotations.jsonl");
    smp_build->add_option("--rewrites", o.rewrites, "rewrites.jsonl");
    auto* smp_sched = leaf(smp_cmd, "schedule", "Write the staged curriculum manifest");
    smp_sched->add_option("--stage", o.stages, "NAME=PATH, repeatable")->required();
    smp_sched->add_option("--hyper", o.hyper, "Hyperparameter metadata (JSON)");

    auto* emb_cmd = group("embed", "Embedding files");
    auto* emb_enc = leaf(emb_cmd, "encode", "Embed texts into an RTE2 file");
    emb_enc->add_option("--texts", o.texts, "JSONL of strings or objects")->required();
    emb_enc->add_option("--field", o.field, "Object field holding the text")->capture_default_str();
    auto* emb_exp = leaf(emb_cmd, "export", "Dump an RTE2 file as JSONL");
    emb_exp->add_option("--embeddings", o.embeddings, "RTE2 file")->required();

    auto* ev_cmd = group("eval", "Benchmarks and metrics");
    auto* ev_passk = leaf(ev_cmd, "passk", "pass@k over trial records");
    ev_passk->add_option("--trials", o.trials, "trials.jsonl")->required();
    ev_passk->add_option("--k", o.ks, "Comma-separated k values")->delimiter(',');
    auto* ev_und = leaf(ev_cmd, "understand", "BLEU, ROUGE and METEOR over candidate/reference pairs");
    ev_und->add_option("--pairs", o.pairs, "understanding.jsonl")->required();
    ev_und->add_flag("--semantic", o.semantic, "Also score embedding similarity and a judge model");
    auto* ev_search = leaf(ev_cmd, "search", "Bitext mining between two embedding files");
    ev_search->add_option("--queries", o.queries, "RTE2 file")->required();
    ev_search->add_option("--candidates", o.candidates, "RTE2 file")->required();
    ev_search->add_option("--gold", o.gold, "JSONL of {query, candidate}; default pairs row i with row i");
    auto* ev_equiv = leaf(ev_cmd, "equiv", "Pair classification of equivalent/inequivalent pairs");
    ev_equiv->add_option("--pairs", o.pairs, "JSONL of {similarity, label} or {code_a, code_b, label}")->required();
    auto* ev_perf = leaf(ev_cmd, "perf", "Regression metrics over predictions");
    ev_perf->add_option("--predictions", o.predictions, "JSONL of {y, yhat}")->required();

    auto* perf_cmd = group("perf", "Area and delay prediction");
    auto* pf_split = leaf(perf_cmd, "split", "Seeded 80:20 split");
    auto* pf_train = leaf(perf_cmd, "train", "Train gradient-boosted trees");
    auto* pf_eval = leaf(perf_cmd, "eval", "Evaluate a trained model");
    for (auto* s : {pf_split, pf_train, pf_eval}) {
        s->add_option("--dataset", o.dataset, "CSV with id,area,delay")->required();
        s->add_option("--embeddings", o.embeddings, "RTE2 file indexed by id")->required();
    }
    pf_train->add_option("--target", o.target, "area, delay or both")
        ->check(CLI::IsMember({"area", "delay", "both"}))
        ->capture_default_str();
    pf_eval->add_option("--model", o.model, "model JSON")->required();

    auto* verify = app.add_subcommand("verify", "Check a manifest against the files it lists");
    verify->add_option("--manifest", o.manifest, "manifest.json")->required();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n\n" << app.help();
        return static_cast<int>(ErrorCategory::Usage);
    }

    try {
        if (verify->parsed()) {
            auto m = RunManifest::from_json(read_json(o.manifest));
            auto issues = verify_manifest(m);
            for (const auto& i : issues) err << "verify: " << i.path << ": " << i.problem << "\n";
            if (!issues.empty()) return static_cast<int>(ErrorCategory::Domain);
            out << "verified " << m.inputs.size() << " inputs and " << m.outputs.size() << " outputs\n";
            return 0;
        }

        ConfigResult cfg = g.config_path.empty() ? validate_config(json::object()) : load_config(g.config_path);
        if (!cfg.ok()) {
            for (const auto& e : cfg.errors) err << "config: " << e << "\n";
            return static_cast<int>(ErrorCategory::Usage);
        }
        std::string command;
        for (const auto& a : args) command += (command.empty() ? "" : " ") + a;
        RunContext ctx(command, g, cfg.config);
        if (!g.config_path.empty()) ctx.input(g.config_path);
        std::filesystem::create_directories(g.out_dir);

        int rc = 0;
        if (seg->parsed()) rc = commands::corpus_segment(ctx, o.input);
        else if (filt->parsed()) rc = commands::corpus_filter(ctx, o.modules);
        else if (dd->parsed()) rc = commands::corpus_dedup(ctx, o.modules);
        else if (ann_run->parsed()) rc = commands::annotate_run(ctx, o.modules, err);
        else if (rw_run->parsed()) rc = commands::rewrite_run(ctx, o.modules, o.annotations, err);
        else if (smp_build->parsed()) rc = commands::samples_build(ctx, o.records, o.modules, o.annotations, o.rewrites);
        else if (smp_sched->parsed()) rc = commands::samples_schedule(ctx, o.stages, o.hyper);
        else if (emb_enc->parsed()) rc = commands::embed_encode(ctx, o.texts, o.field);
        else if (emb_exp->parsed()) rc = commands::embed_export(ctx, o.embeddings);
        else if (ev_passk->parsed()) rc = commands::eval_passk(ctx, o.trials, o.ks);
        else if (ev_und->parsed()) rc = commands::eval_understand(ctx, o.pairs, o.semantic);
        else if (ev_search->parsed()) rc = commands::eval_search(ctx, o.queries, o.candidates, o.gold);
        else if (ev_equiv->parsed()) rc = commands::eval_equiv(ctx, o.pairs);
        else if (ev_perf->parsed()) rc = commands::eval_perf(ctx, o.predictions);
        else if (pf_split->parsed()) rc = commands::perf_split(ctx, o.dataset, o.embeddings);
        else if (pf_train->parsed()) rc = commands::perf_train(ctx, o.dataset, o.embeddings, o.target);
        else if (pf_eval->parsed()) rc = commands::perf_eval(ctx, o.model, o.dataset, o.embeddings);
        auto manifest = ctx.finish();
        out << chosen << ": wrote " << ctx.manifest().outputs.size() << " outputs, manifest " << manifest.string()
            << "\n";
        return rc;
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const json::exception& e) {
        err << "error [InvalidInput]: " << e.what() << "\n";
        return static_cast<int>(ErrorCategory::Domain);
    } catch (const std::exception& e) {
        err << "error [Io]: " << e.what() << "\n";
        return static_cast<int>(ErrorCategory::Infrastructure);
    }
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, out, err);
}

} // namespace rtlkit::cli
