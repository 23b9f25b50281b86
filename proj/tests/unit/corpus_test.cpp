#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rtlkit/common/random.hpp"
#include "rtlkit/corpus/declarations.hpp"
#include "rtlkit/corpus/dedup.hpp"
#include "rtlkit/corpus/filter.hpp"
#include "rtlkit/corpus/minhash.hpp"
#include "rtlkit/corpus/segment.hpp"
#include "rtlkit/corpus/syntax.hpp"

using namespace rtlkit;
using namespace rtlkit::corpus;

namespace {

// Exact Jaccard over width-w shingle sets, built from joined token strings.
double exact_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t w) {
    auto shingles = [w](std::vector<std::string> t) {
        while (t.size() < w) t.emplace_back(kPadToken);
        std::set<std::string> s;
        for (std::size_t i = 0; i + w <= t.size(); ++i) {
            std::string key;
            for (std::size_t k = 0; k < w; ++k) key += t[i + k] + '\x1f';
            s.insert(key);
        }
        return s;
    };
    auto sa = shingles(a), sb = shingles(b);
    std::size_t inter = 0;
    for (const auto& x : sa) inter += sb.count(x);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

std::vector<std::string> fresh_tokens(Rng& rng, std::size_t n, const std::string& tag) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(tag + std::to_string(rng.next()));
    return out;
}

const char* kTwoModules =
    "// header comment\n"
    "module add(input a, input b, output y);\n"
    "  assign y = a ^ b;\n"
    "endmodule\n"
    "\n"
    "/* module fake(); endmodule */\n"
    "module inv(\n"
    "  input a,\n"
    "  output y\n"
    ");\n"
    "  assign y = ~a;\n"
    "endmodule\n";

const char* kCounter =
    "module counter(input clk, input rst, output reg [3:0] q);\n"
    "  always @(posedge clk) begin\n"
    "    if (rst) q <= 4'd0;\n"
    "    else q <= q + 4'd1;\n"
    "  end\n"
    "endmodule";

VerilogModule module_of(const std::string& src) {
    auto mods = segment_file(src, "t.v");
    EXPECT_EQ(mods.size(), 1u);
    return mods.at(0);
}

} // namespace

TEST(Segment, TwoModulesWithHandCountedSpans) {
    auto mods = segment_file(kTwoModules, "two.v");
    ASSERT_EQ(mods.size(), 2u);
    EXPECT_EQ(mods[0].line_span, (LineSpan{2, 4}));
    EXPECT_EQ(mods[1].line_span, (LineSpan{7, 12}));
    EXPECT_EQ(mods[0].total_lines, 3u);
    EXPECT_EQ(mods[1].total_lines, 6u);
    EXPECT_TRUE(mods[0].structurally_complete);
    EXPECT_TRUE(mods[1].structurally_complete);
    EXPECT_EQ(mods[0].origin_path, "two.v");
    EXPECT_TRUE(mods[0].source_text.starts_with("module add"));
    EXPECT_TRUE(mods[1].source_text.ends_with("endmodule"));
}

TEST(Segment, EmptyFile) { EXPECT_TRUE(segment_file("", "e.v").empty()); }

TEST(Segment, ModuleOnlyInsideBlockComment) {
    EXPECT_TRUE(segment_file("/*\nmodule ghost(input a);\nendmodule\n*/\n", "c.v").empty());
    EXPECT_TRUE(segment_file("// module ghost; endmodule\n", "c.v").empty());
    EXPECT_TRUE(segment_file("initial $display(\"module x; endmodule\");\n", "s.v").empty());
}

TEST(Segment, UnterminatedBlockCommentNamesLine) {
    try {
        segment_file("module a;\nendmodule\n\n/* never closed\n", "bad.v");
        FAIL() << "expected ParseError";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(Segment, UnterminatedStringNamesLine) {
    try {
        segment_file("module a;\n initial $display(\"oops);\nendmodule\n", "bad.v");
        FAIL() << "expected ParseError";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Segment, EndmoduleWithoutModuleRejected) {
    EXPECT_THROW(segment_file("wire x;\nendmodule\n", "bad.v"), Error);
}

TEST(Segment, MissingEndmoduleYieldsIncompleteRecord) {
    auto mods = segment_file("module a(input x);\n  wire y;\n", "open.v");
    ASSERT_EQ(mods.size(), 1u);
    EXPECT_FALSE(mods[0].structurally_complete);
    EXPECT_EQ(mods[0].line_span, (LineSpan{1, 2}));
    auto d = quality_filter(mods[0], 0.8);
    EXPECT_FALSE(d.keep);
    EXPECT_EQ(d.reason, FilterReason::Incomplete);
}

TEST(Segment, CommentStatistics) {
    const std::string src =
        "module m;\n"
        "  // one\n"
        "  /* two\n"
        "\n"
        "     four */\n"
        "  wire w; // trailing comment does not make this a comment line\n"
        "endmodule";
    auto m = module_of(src);
    EXPECT_EQ(m.total_lines, 7u);
    EXPECT_EQ(m.comment_lines, 4u);  // lines 2-5; the blank line 4 lies inside the block comment
    EXPECT_NEAR(m.comment_ratio, 4.0 / 7.0, 1e-12);
}

TEST(Segment, IdIsContentHashIgnoringTrailingWhitespace) {
    auto a = module_of("module m;\nendmodule");
    auto b = module_of("module m;   \nendmodule");
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.id.size(), 32u);
    auto c = module_of("module n;\nendmodule");
    EXPECT_NE(a.id, c.id);
}

TEST(Segment, RoundTripReproducesNonGapRegions) {
    Rng rng(7);
    const std::vector<std::string> pieces = {
        "module a(input x, output y);\n  assign y = x;\nendmodule",
        "/* module hidden; endmodule */",
        "// endmodule in a comment\n",
        "\n\n",
        "`timescale 1ns/1ps\n",
        "module b;\n  initial $display(\"endmodule\");\nendmodule",
        "module c #(parameter W = 4)(input [W-1:0] d);\n  // comment\nendmodule",
    };
    for (int trial = 0; trial < 200; ++trial) {
        std::string file;
        std::size_t parts = 1 + rng.below(8);
        for (std::size_t i = 0; i < parts; ++i) {
            file += pieces[rng.below(pieces.size())];
            file += rng.below(2) ? "\n" : " ";
        }
        auto mods = segment_file(file, "r.v");
        std::size_t cursor = 0;
        for (const auto& m : mods) {
            auto at = file.find(m.source_text, cursor);
            ASSERT_NE(at, std::string::npos);
            // everything skipped over is a gap: no module keyword outside comments/strings
            for (const auto& t : lex(file.substr(cursor, at - cursor)))
                if (t.kind == TokenKind::Identifier)
                    EXPECT_NE(t.text(file.substr(cursor, at - cursor)), "module");
            cursor = at + m.source_text.size();
            EXPECT_TRUE(m.structurally_complete);
        }
        std::string rest = file.substr(cursor);
        for (const auto& t : lex(rest))
            if (t.kind == TokenKind::Identifier) EXPECT_NE(t.text(rest), "module");
    }
}

TEST(QualityFilter, IncompleteWinsOverCommentHeavy) {
    VerilogModule m;
    m.total_lines = 10;
    m.comment_lines = 10;
    m.comment_ratio = 1.0;
    m.structurally_complete = false;
    EXPECT_EQ(quality_filter(m, 0.8).reason, FilterReason::Incomplete);
}

TEST(QualityFilter, NineOfTenCommentLinesFromSource) {
    // line 1 `module m;` is code, 8 comment lines, then a line that starts inside a block comment
    std::string src = "module m; /*\n";
    for (int i = 0; i < 8; ++i) src += "  inside\n";
    src += "*/ endmodule";
    auto m = module_of(src);
    ASSERT_EQ(m.total_lines, 10u);
    EXPECT_EQ(m.comment_lines, 9u);
    EXPECT_DOUBLE_EQ(m.comment_ratio, 0.9);
    auto d = quality_filter(m, 0.8);
    EXPECT_FALSE(d.keep);
    EXPECT_EQ(d.reason, FilterReason::CommentHeavy);
}

TEST(QualityFilter, CompleteUncommentedModuleKept) {
    auto d = quality_filter(module_of(kCounter), 0.8);
    EXPECT_TRUE(d.keep);
    EXPECT_EQ(d.reason, FilterReason::Kept);
}

TEST(QualityFilter, PureAndValidatesThreshold) {
    auto m = module_of(kCounter);
    auto a = quality_filter(m, 0.5), b = quality_filter(m, 0.5);
    EXPECT_EQ(a.keep, b.keep);
    EXPECT_EQ(a.reason, b.reason);
    EXPECT_THROW(quality_filter(m, 0.0), Error);
    EXPECT_THROW(quality_filter(m, 1.5), Error);
}

TEST(MinHash, IdenticalModulesIdenticalSignatures) {
    auto a = module_of(kCounter), b = module_of(kCounter);
    auto sa = minhash_signature(a), sb = minhash_signature(b);
    EXPECT_EQ(sa.signature, sb.signature);
    EXPECT_EQ(sa.signature.size(), 128u);
    EXPECT_DOUBLE_EQ(estimated_jaccard(sa, sb), 1.0);
}

TEST(MinHash, CommentsDoNotAffectSignature) {
    auto a = module_of(kCounter);
    auto b = module_of(std::string(kCounter).insert(0, "/* doc */ "));
    EXPECT_EQ(minhash_signature(a).signature, minhash_signature(b).signature);
}

TEST(MinHash, ShortStreamsArePadded) {
    auto sig = minhash_tokens({"a", "b"}, "x", 16, 5, 1);
    EXPECT_EQ(sig.signature.size(), 16u);
    EXPECT_EQ(sig.signature, minhash_tokens({"a", "b"}, "x", 16, 5, 1).signature);
}

TEST(MinHash, HalfJaccardEstimatedWithinTolerance) {
    Rng rng(2024);
    int within = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto shared = fresh_tokens(rng, 60, "s");
        auto only_a = fresh_tokens(rng, 30, "a");
        auto only_b = fresh_tokens(rng, 30, "b");
        auto A = shared, B = shared;
        A.insert(A.end(), only_a.begin(), only_a.end());
        B.insert(B.end(), only_b.begin(), only_b.end());
        ASSERT_DOUBLE_EQ(exact_jaccard(A, B, 1), 0.5);
        auto sa = minhash_tokens(A, "a", 128, 1, static_cast<std::uint64_t>(trial));
        auto sb = minhash_tokens(B, "b", 128, 1, static_cast<std::uint64_t>(trial));
        if (std::abs(estimated_jaccard(sa, sb) - 0.5) <= 0.15) ++within;
    }
    EXPECT_GE(within, 95);
}

TEST(MinHash, DisjointStreamsNearZero) {
    Rng rng(99);
    auto A = fresh_tokens(rng, 80, "x"), B = fresh_tokens(rng, 80, "y");
    ASSERT_EQ(exact_jaccard(A, B, 5), 0.0);
    auto sa = minhash_tokens(A, "a", 128, 5, 3), sb = minhash_tokens(B, "b", 128, 5, 3);
    EXPECT_LE(estimated_jaccard(sa, sb), 0.05);
}

TEST(MinHash, ErrorShrinksWithMoreHashes) {
    Rng rng(5);
    double err16 = 0, err128 = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        auto shared = fresh_tokens(rng, 1 + rng.below(60), "s");
        auto A = shared, B = shared;
        auto xa = fresh_tokens(rng, rng.below(60), "a"), xb = fresh_tokens(rng, rng.below(60), "b");
        A.insert(A.end(), xa.begin(), xa.end());
        B.insert(B.end(), xb.begin(), xb.end());
        const double exact = exact_jaccard(A, B, 1);
        const auto seed = static_cast<std::uint64_t>(t) * 31;
        err16 += std::abs(estimated_jaccard(minhash_tokens(A, "a", 16, 1, seed), minhash_tokens(B, "b", 16, 1, seed)) - exact);
        err128 += std::abs(estimated_jaccard(minhash_tokens(A, "a", 128, 1, seed), minhash_tokens(B, "b", 128, 1, seed)) - exact);
    }
    EXPECT_LT(err128 / trials, err16 / trials);
}

TEST(Dedup, TripleDuplicate) {
    auto m = module_of(kCounter);
    auto sig = minhash_signature(m);
    auto r = dedup({sig, sig, sig}, 0.85);
    EXPECT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.dropped.size(), 2u);
    EXPECT_EQ(r.survivor, (std::vector<std::ptrdiff_t>{-1, 0, 0}));
}

TEST(Dedup, UnrelatedModulesBothKept) {
    auto a = module_of(kCounter);
    auto b = module_of("module mux2(input s, input a, input b, output y);\n  assign y = s ? b : a;\nendmodule");
    ASSERT_LT(exact_jaccard(code_tokens(a.source_text), code_tokens(b.source_text), 5), 0.85);
    auto r = dedup({minhash_signature(a), minhash_signature(b)}, 0.85);
    EXPECT_EQ(r.kept.size(), 2u);
}

TEST(Dedup, ExactPairPlusDistinct) {
    auto a = module_of(kCounter);
    auto c = module_of("module mux2(input s, input a, input b, output y);\n  assign y = s ? b : a;\nendmodule");
    ASSERT_DOUBLE_EQ(exact_jaccard(code_tokens(a.source_text), code_tokens(a.source_text), 5), 1.0);
    auto r = dedup({minhash_signature(a), minhash_signature(a), minhash_signature(c)}, 0.85);
    EXPECT_EQ(r.kept.size(), 2u);
    EXPECT_EQ(r.dropped.size(), 1u);
}

TEST(Dedup, IdempotentOnKeptSet) {
    Rng rng(11);
    std::vector<ShingleSignature> corpus;
    auto base = fresh_tokens(rng, 40, "t");
    for (int i = 0; i < 30; ++i) {
        auto toks = base;
        if (rng.below(2)) toks = fresh_tokens(rng, 40, "u" + std::to_string(i));
        else toks[rng.below(toks.size())] = "mut" + std::to_string(i);
        corpus.push_back(minhash_tokens(toks, "m" + std::to_string(i), 128, 5, 0));
    }
    auto first = dedup(corpus, 0.85);
    std::vector<ShingleSignature> kept;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (first.survivor[i] < 0) kept.push_back(corpus[i]);
    auto second = dedup(kept, 0.85);
    EXPECT_TRUE(second.dropped.empty());
    EXPECT_EQ(second.kept, first.kept);
}

TEST(Syntax, CounterIsValid) {
    BuiltinSyntaxChecker checker;
    auto m = module_of(kCounter);
    auto v = syntax_check(m, checker);
    EXPECT_TRUE(v.valid) << v.diagnostic;
    ASSERT_TRUE(m.syntax.has_value());
}

TEST(Syntax, UnbalancedParenthesesInvalid) {
    BuiltinSyntaxChecker checker;
    auto m = module_of("module m(input a, output y);\n  assign y = (a & (a | a);\nendmodule");
    auto v = checker.check(m);
    EXPECT_FALSE(v.valid);
    EXPECT_NE(v.diagnostic.find("line"), std::string::npos);
}

TEST(Syntax, UnmatchedBeginInvalid) {
    auto v = BuiltinSyntaxChecker::check_text(
        "module m(input clk);\n  always @(posedge clk) begin\n    if (clk) begin end\nendmodule");
    EXPECT_FALSE(v.valid);
}

TEST(Syntax, MalformedHeaderInvalid) {
    EXPECT_FALSE(BuiltinSyntaxChecker::check_text("module (input a);\nendmodule").valid);
    EXPECT_FALSE(BuiltinSyntaxChecker::check_text("module m(input a)\nendmodule").valid);
    EXPECT_TRUE(BuiltinSyntaxChecker::check_text("module m #(parameter W = 2) (input [W-1:0] a);\nendmodule").valid);
}

TEST(Syntax, ExternalAdapterVerdicts) {
    auto m = module_of(kCounter);
    EXPECT_TRUE(ExternalSyntaxChecker("grep -q endmodule {file}", 10).check(m).valid);
    auto bad = ExternalSyntaxChecker("echo 'syntax error near line 3' >&2; exit 1", 10).check(m);
    EXPECT_FALSE(bad.valid);
    EXPECT_NE(bad.diagnostic.find("syntax error"), std::string::npos);
}

TEST(Syntax, ExternalAdapterMissingToolIsInfrastructureError) {
    auto m = module_of(kCounter);
    try {
        ExternalSyntaxChecker("rtlkit-no-such-checker-binary {file}", 10).check(m);
        FAIL() << "expected infrastructure error";
    } catch (const Error& e) {
        EXPECT_TRUE(e.is_infrastructure());
        EXPECT_EQ(e.kind(), ErrorKind::ToolNotFound);
    }
}

TEST(Syntax, ExternalAdapterTimeoutIsInfrastructureError) {
    auto m = module_of(kCounter);
    try {
        ExternalSyntaxChecker("sleep 5", 0.2).check(m);
        FAIL() << "expected timeout";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Timeout);
        EXPECT_TRUE(e.is_infrastructure());
    }
}

TEST(Declarations, CollectsModulePortsNetsParameters) {
    auto names = declared_identifiers(
        "module adder #(parameter WIDTH = 8) (\n"
        "  input  wire [WIDTH-1:0] a_in, b_in,\n"
        "  output reg  [WIDTH:0]   sum_out\n"
        ");\n"
        "  localparam ZERO = 0;\n"
        "  wire carry_w;\n"
        "  reg [3:0] mem [0:7];\n"
        "  function [7:0] twice; input [7:0] v; twice = v << 1; endfunction\n"
        "endmodule");
    for (auto n : {"adder", "WIDTH", "a_in", "b_in", "sum_out", "ZERO", "carry_w", "mem", "twice", "v"})
        EXPECT_TRUE(names.count(n)) << n;
    EXPECT_FALSE(names.count("wire"));
    EXPECT_FALSE(names.count("input"));
}

TEST(Declarations, NonAnsiHeaderPorts) {
    auto names = declared_identifiers("module m(a, b, y);\n input a, b;\n output y;\n assign y = a & b;\nendmodule");
    for (auto n : {"m", "a", "b", "y"}) EXPECT_TRUE(names.count(n)) << n;
}
