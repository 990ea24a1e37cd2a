#include "common.hpp"
#include "fmc/harness.hpp"
#include "fmc/machine.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/surface.hpp"

using namespace fmc;
using namespace fmc::test;

namespace {

RunResult run_surface(const std::string& src, unsigned modulus = 8, const Memory& init = {}) {
    SurfaceOptions o;
    o.ints.modulus = modulus;
    return run(desugar_source(src, o), init, 100000);
}

// The single entry at location l, fully evaluated to a choice when it is a thunk.
ChoiceLabel top_value(const RunResult& r, const Location& l = Location()) {
    const auto& st = r.state.mem.stacks.at(l);
    EXPECT_EQ(st.size(), 1u);
    Term v = st.back();
    if (v->kind == Kind::Choice) return v->label;
    auto inner = run(v, {}, 100000);
    EXPECT_EQ(inner.kind, RunResult::Final);
    return inner.state.mem.stacks.at(Location()).back()->label;
}

const char* kWhile = "var a : Z; while !a < 5 do a := !a + 1";

}  // namespace

TEST(Desugar, Exceptions) {
    EXPECT_TRUE(AlphaEq(desugar_source("throw 'e"), P("'e")));
    EXPECT_TRUE(AlphaEq(desugar_source("try throw 'e catch 'e skip"), P("'e;'e->*")));
}

TEST(Desugar, Conditional) {
    EXPECT_TRUE(AlphaEq(desugar_source("if true then throw 'a else throw 'b"),
                        P("['true].*;<x:B>.x;'true->'a;'false->'b")));
}

TEST(Desugar, WhileShape) {
    Term t = desugar_source("var a : Z; while !a < 5 do skip");
    // (cond; <x>.x; 'true -> body)^* ; 'false -> * ; 'break -> *
    ASSERT_EQ(t->kind, Kind::Case);
    EXPECT_EQ(t->label, break_label());
    ASSERT_EQ(t->a->kind, Kind::Case);
    EXPECT_EQ(t->a->label, false_label());
    ASSERT_EQ(t->a->a->kind, Kind::Loop);
    EXPECT_TRUE(t->a->a->label.is_star());
}

TEST(Desugar, Compositional) {
    SurfaceProgram p = parse_surface("var a : Z; a := 1; print !a");
    ASSERT_EQ(p.body->kind, SK::Seq);
    Term whole = desugar(p);
    ASSERT_EQ(whole->kind, Kind::Case);
    EXPECT_TRUE(whole->label.is_star());
    SurfaceProgram second = p;
    second.body = p.body->kids[1];
    EXPECT_TRUE(AlphaEq(whole->b, desugar(second)));
    EXPECT_TRUE(AlphaEq(desugar_source("skip; skip"), P("*;*")));
}

TEST(Desugar, CbvEncodings) {
    EXPECT_TRUE(AlphaEq(desugar_source("x"), P("[x].*")));
    EXPECT_TRUE(AlphaEq(desugar_source("\\x:Z. x"), P("[<x:Z>.[x].*].*")));
    auto r = run_surface("(\\x:Z. x) 3");
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_TRUE(r.choice.is_star());
    EXPECT_EQ(top_value(r), int_label(3));
    SurfaceOptions ff;
    ff.function_first = true;
    auto s = run(desugar_source("(\\x:Z. x) 3", ff), {}, 10000);
    ASSERT_EQ(s.kind, RunResult::Final);
    EXPECT_EQ(top_value(s), int_label(3));
}

TEST(Desugar, LetReturnChain) {
    // let x = return M in N reduces to {M/x}N in three steps.
    Term t = desugar_source("let x = ['k] in x");
    ReductionTrace tr;
    auto r = normalize(t, 100, UnrollPolicy::Forbid(), &tr);
    ASSERT_GE(tr.size(), 3u);
    EXPECT_EQ(tr[0].rule, RRule::PrefixPush);
    EXPECT_EQ(tr[1].rule, RRule::Select);
    EXPECT_EQ(tr[2].rule, RRule::Beta);
    EXPECT_TRUE(AlphaEq(tr[2].after, substitute(tr[0].before->a->a, tr[1].after->b->name, tr[1].after->b->b)));
}

TEST(IntOps, XorTruthTableForModulusTwo) {
    for (unsigned a = 0; a < 2; ++a)
        for (unsigned b = 0; b < 2; ++b) {
            auto r = run_surface(std::to_string(a) + " + " + std::to_string(b), 2);
            ASSERT_EQ(r.kind, RunResult::Final);
            EXPECT_EQ(top_value(r), int_label(a ^ b)) << a << " + " << b;
        }
}

TEST(IntOps, AdditionAndComparisonModulusEight) {
    for (unsigned a = 0; a < 8; ++a)
        for (unsigned b = 0; b < 8; ++b) {
            auto s = run_surface(std::to_string(a) + " + " + std::to_string(b));
            ASSERT_EQ(s.kind, RunResult::Final);
            EXPECT_EQ(top_value(s), int_label((a + b) % 8));
            auto l = run_surface(std::to_string(a) + " < " + std::to_string(b));
            ASSERT_EQ(l.kind, RunResult::Final);
            EXPECT_EQ(top_value(l), a < b ? true_label() : false_label());
        }
}

TEST(IntOps, TypesAndIrreflexivity) {
    for (unsigned m : {2u, 3u, 8u}) {
        IntOps ops = gen_intops({m});
        auto binary = [&](const ValueType& res) {
            ValueType t;
            t.in.set(Location(), {ops.Z, ops.Z});
            MemType out;
            out.set(Location(), {res});
            t.out.branch[ChoiceLabel::star()] = out;
            return t;
        };
        EXPECT_EQ(free_vars(ops.plus).size(), 0u);
        EXPECT_NO_THROW(check({}, ops.plus, binary(ops.Z))) << m;
        EXPECT_NO_THROW(check({}, ops.less, binary(ops.B))) << m;
    }
    auto r = run_surface("0 < 0");
    EXPECT_EQ(top_value(r), false_label());
}

TEST(While, CounterLoopTypeAndRun) {
    Term t = desugar_source(kWhile);
    EXPECT_EQ(synthesize({}, t), T("a(Z) => a(Z).'*"));
    Memory m;
    m.push(Location("a"), P("'n0"));
    auto r = run(t, m, 100000);
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_TRUE(r.choice.is_star());
    ASSERT_EQ(r.state.mem.stacks.size(), 1u);
    EXPECT_TRUE(AlphaEq(r.state.mem.stacks.at(Location("a")).back(), P("'n5")));
}

TEST(While, BreakAndDoWhile) {
    auto r = run_surface("a := 0; while true do (a := !a + 1; if 3 < !a then break else skip)");
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_TRUE(r.choice.is_star());
    EXPECT_TRUE(AlphaEq(r.state.mem.stacks.at(Location("a")).back(), P("'n4")));
    auto d = run_surface("a := 6; do a := !a + 1 while !a < 3");
    ASSERT_EQ(d.kind, RunResult::Final);
    EXPECT_TRUE(AlphaEq(d.state.mem.stacks.at(Location("a")).back(), P("'n7")));
}

TEST(Exceptions, TransparencyOnRandomHandlers) {
    GenConfig c = suite_config("agreement-untyped", 31);
    for (std::uint64_t k = 0; k < 200; ++k) {
        Rng rng = item_rng(31, k);
        Term n = gen_term(c, rng);
        Term tried = kase(choice(ChoiceLabel("e")), ChoiceLabel("e"), n);
        auto a = run(tried, {}, 10000);
        auto b = run(n, {}, 10000);
        ASSERT_EQ(a.kind, b.kind) << print(n);
        if (a.kind != RunResult::Final) continue;
        ASSERT_EQ(a.choice, b.choice);
        ASSERT_TRUE(AlphaEq(readback(a.state), readback(b.state)));
    }
}

TEST(Exceptions, UncaughtPropagate) {
    auto r = run_surface("try throw 'f catch 'e print 1");
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_EQ(r.choice, ChoiceLabel("f"));
    EXPECT_TRUE(r.state.mem.empty());
    auto s = run_surface("try throw 'e catch 'e print 1");
    ASSERT_EQ(s.kind, RunResult::Final);
    EXPECT_TRUE(s.choice.is_star());
    EXPECT_EQ(s.state.mem.stacks.at(out_loc()).size(), 1u);
}

TEST(Exceptions, LabelClash) {
    EXPECT_THROW(desugar_source("throw 'true"), DesugarError);
    EXPECT_THROW(desugar_source("try skip catch 'n3 skip"), DesugarError);
}

TEST(Store, ReadPrintSample) {
    Memory m;
    m.push(in_loc(), P("'n2"));
    m.push(rnd_loc(), P("'n5"));
    auto r = run_surface("print (read + sample)", 8, m);
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_EQ(top_value(r, out_loc()), int_label(7));
    auto empty = run_surface("print read");
    EXPECT_EQ(empty.kind, RunResult::Stuck);
    EXPECT_EQ(empty.reason, StuckReason::EmptyPop);
}

TEST(Store, UninitializedCellNeedsPreload) {
    auto r = run_surface("var a : Z; a := !a + 1");
    EXPECT_EQ(r.kind, RunResult::Stuck);
    Memory m;
    m.push(Location("a"), P("'n7"));
    auto s = run_surface("var a : Z; a := !a + 1", 8, m);
    ASSERT_EQ(s.kind, RunResult::Final);
    EXPECT_TRUE(AlphaEq(s.state.mem.stacks.at(Location("a")).back(), P("'n0")));
}

TEST(Data, NullaryConstructorsActLikeBooleans) {
    const char* src = "data T = 'yes | 'no; case 'no of { 'yes -> print 1 | 'no -> print 2 }";
    auto r = run_surface(src);
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_EQ(top_value(r, out_loc()), int_label(2));
}

TEST(Data, ConstructorEncodingAndStackOrder) {
    DataDecl d{"P", {{ChoiceLabel("pair"), {int_type(8), int_type(8)}}}};
    SurfaceProgram p = parse_surface("'pair(m1, m2)");
    Term t = desugar_cbn_data(d, p.body);
    EXPECT_TRUE(AlphaEq(t, P("[[m2].*].[[m1].*].'pair")));
    // Patterns bind in argument order whatever the stack order.
    auto r = run_surface("data P = 'pair(Z, Z); case 'pair(1, 2) of { 'pair x y -> print (x + x + y) }");
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_EQ(top_value(r, out_loc()), int_label(4));
}

TEST(Data, ArityMismatch) {
    EXPECT_THROW(desugar_source("data P = 'pair(Z, Z); case 'pair(1, 2) of { 'pair x -> skip }"), DesugarError);
}

TEST(Surface, ExamplesSynthesize) {
    const char* programs[] = {
        kWhile,
        "a := 0; while true do (a := !a + 1; if 3 < !a then break else skip)",
        "try throw 'e catch 'e print 1",
        "data T = 'yes | 'no; case 'no of { 'yes -> print 1 | 'no -> print 2 }",
        "print (read + sample)",
        "let f = \\x:Z. x + 1 in f 3",
    };
    for (const char* src : programs) EXPECT_NO_THROW(synthesize({}, desugar_source(src))) << src;
}

TEST(Surface, ParseErrors) {
    EXPECT_THROW(parse_surface("while do"), ParseError);
    EXPECT_THROW(parse_surface("a := 9"), ParseError);
    try {
        parse_surface("skip;\n  if");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2);
    }
}
