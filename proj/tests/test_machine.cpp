#include "common.hpp"
#include "fmc/harness.hpp"
#include "fmc/machine.hpp"

using namespace fmc;
using namespace fmc::test;

namespace {

GenConfig untyped(std::uint64_t seed) {
    GenConfig c;
    c.seed = seed;
    c.max_size = 30;
    c.loop_prob = 0.2;
    return c;
}

}  // namespace

TEST(Step, PushMovesArgumentToMemory) {
    State s{{}, P("[N]a.M"), {{ChoiceLabel("k"), P("K")}}};
    auto r = step(s);
    ASSERT_EQ(r.kind, StepResult::Next);
    EXPECT_EQ(r.rule, Rule::Push);
    ASSERT_EQ(s.mem.stacks.size(), 1u);
    ASSERT_EQ(s.mem.stacks.at(Location("a")).size(), 1u);
    EXPECT_TRUE(AlphaEq(s.mem.stacks.at(Location("a")).back(), P("N")));
    EXPECT_TRUE(AlphaEq(s.term, P("M")));
    ASSERT_EQ(s.cont.size(), 1u);
}

TEST(Step, SkipsNonMatchingFrame) {
    State s{{}, P("'i"), {{ChoiceLabel("j"), P("M")}}};
    auto r = step(s);
    ASSERT_EQ(r.kind, StepResult::Next);
    EXPECT_EQ(r.rule, Rule::Skip);
    EXPECT_TRUE(s.mem.empty());
    EXPECT_TRUE(AlphaEq(s.term, P("'i")));
    EXPECT_TRUE(s.cont.empty());
}

TEST(Step, SelectsMatchingFrame) {
    State s{{}, P("'j"), {{ChoiceLabel("j"), P("M")}}};
    auto r = step(s);
    EXPECT_EQ(r.rule, Rule::Select);
    EXPECT_TRUE(AlphaEq(s.term, P("M")));
    EXPECT_TRUE(s.cont.empty());
}

TEST(Step, CaseAndLoopPushFrames) {
    State s{{}, P("M;'i->N"), {}};
    EXPECT_EQ(step(s).rule, Rule::Case);
    ASSERT_EQ(s.cont.size(), 1u);
    EXPECT_EQ(s.cont.back().label, ChoiceLabel("i"));
    EXPECT_TRUE(AlphaEq(s.term, P("M")));

    State l{{}, P("M^'i"), {}};
    EXPECT_EQ(step(l).rule, Rule::Loop);
    ASSERT_EQ(l.cont.size(), 1u);
    EXPECT_TRUE(AlphaEq(l.cont.back().term, P("M^'i")));
}

TEST(Step, FinalState) {
    State s{{}, P("*"), {}};
    EXPECT_EQ(step(s).kind, StepResult::Final);
}

TEST(Step, PopOfLastEntryLeavesCanonicalMemory) {
    State s{{}, P("a<x>.x"), {}};
    s.mem.push(Location("a"), P("'i"));
    EXPECT_EQ(step(s).rule, Rule::Pop);
    EXPECT_TRUE(s.mem.empty());
    EXPECT_TRUE(s.mem.stacks.empty());
}

TEST(Run, PushPop) {
    auto r = run(P("[*].<y>.y"), {}, 100);
    ASSERT_EQ(r.kind, RunResult::Final);
    EXPECT_TRUE(r.state.mem.empty());
    EXPECT_TRUE(r.choice.is_star());
    // Transitions are counted; reaching the final state is not a transition.
    EXPECT_EQ(r.steps, 2u);
    EXPECT_EQ(r.pops, 1u);
}

TEST(Run, FreeVariableIsStuck) {
    auto r = run(P("x"), {}, 100);
    ASSERT_EQ(r.kind, RunResult::Stuck);
    EXPECT_EQ(r.reason, StuckReason::FreeVariable);
}

TEST(Run, EmptyPopIsStuck) {
    auto r = run(P("a<x>.x"), {}, 100);
    ASSERT_EQ(r.kind, RunResult::Stuck);
    EXPECT_EQ(r.reason, StuckReason::EmptyPop);
}

TEST(Run, LoopExhaustsFuel) {
    auto r = run(P("('i)^'i"), {}, 10);
    EXPECT_EQ(r.kind, RunResult::FuelExhausted);
    EXPECT_EQ(r.steps, 10u);
}

TEST(Run, ZeroFuel) {
    EXPECT_EQ(run(P("*"), {}, 0).kind, RunResult::Final);
    EXPECT_EQ(run(P("[*].*"), {}, 0).kind, RunResult::FuelExhausted);
}

TEST(Run, StoreUpdate) {
    // c := 'k on a cell holding 'j
    Memory m;
    m.push(Location("c"), P("'j"));
    auto r = run(P("['k].<x>.c<_>.[x]c.*"), m, 100);
    ASSERT_EQ(r.kind, RunResult::Final);
    ASSERT_EQ(r.state.mem.stacks.size(), 1u);
    EXPECT_TRUE(AlphaEq(r.state.mem.stacks.at(Location("c")).back(), P("'k")));
}

TEST(Readback, Examples) {
    EXPECT_TRUE(AlphaEq(readback(State{{}, P("M"), {}}), P("M")));
    Memory m;
    m.push(Location("a"), P("N"));
    EXPECT_TRUE(AlphaEq(readback(State{m, P("M"), {}}), P("[N]a.M")));
    EXPECT_TRUE(AlphaEq(readback(State{{}, P("M"), {{ChoiceLabel("i"), P("N")}}}), P("M;'i->N")));
}

TEST(Readback, Order) {
    Memory m;
    m.push(Location(), P("A"));
    m.push(Location(), P("B"));
    m.push(Location("b"), P("C"));
    State s{m, P("M"), {{ChoiceLabel("i"), P("N")}, {ChoiceLabel("j"), P("Q")}}};
    // Head frame innermost, head of each stack innermost, default location outermost.
    EXPECT_TRUE(AlphaEq(readback(s), P("[A].[B].[C]b.(M;'j->Q;'i->N)")));
}

TEST(Run, Deterministic) {
    for (std::uint64_t k = 0; k < 200; ++k) {
        Rng rng = item_rng(3, k);
        Term t = gen_term(untyped(3), rng);
        Trace a, b;
        auto r1 = run(t, {}, 2000, &a);
        auto r2 = run(t, {}, 2000, &b);
        ASSERT_EQ(r1.kind, r2.kind);
        ASSERT_EQ(trace_text(a), trace_text(b));
        ASSERT_EQ(trace_json(a), trace_json(b));
    }
}

TEST(Run, ClassificationAndCounters) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        Rng rng = item_rng(4, k);
        Term t = gen_term(untyped(4), rng);
        State s{{}, t, {}};
        std::size_t pops = 0;
        for (std::size_t n = 0; n < 500; ++n) {
            bool final_shape = s.term->kind == Kind::Choice && s.cont.empty();
            auto r = step(s);
            ASSERT_EQ(r.kind == StepResult::Final, final_shape);
            if (r.kind != StepResult::Next) break;
            if (r.rule == Rule::Pop) ++pops;
        }
        Trace tr;
        auto res = run(t, {}, 500, &tr);
        ASSERT_EQ(res.pops, pops);
        ASSERT_EQ(res.steps, tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i) ASSERT_EQ(tr[i].step, i + 1);
    }
}

TEST(Trace, Fields) {
    Trace tr;
    run(P("['i].<x>.x"), {}, 10, &tr);
    ASSERT_EQ(tr.size(), 2u);
    EXPECT_EQ(tr[0].rule, Rule::Push);
    EXPECT_EQ(tr[1].rule, Rule::Pop);
    EXPECT_NE(trace_json(tr).find("\"rule\":\"pop\""), std::string::npos);
}

TEST(Fuel, DefaultAndEnvironment) {
    unsetenv("FMC_FUEL");
    EXPECT_EQ(default_fuel(), 10000u);
    setenv("FMC_FUEL", "77", 1);
    EXPECT_EQ(default_fuel(), 77u);
    unsetenv("FMC_FUEL");
}

TEST(Run, SizeBlowupEndsAsFuelExhausted) {
    // Each round substitutes the stored value twice, doubling it.
    Term t = P("a<x1:e => e.'k>.(a<x2:e => e.'k>.[[a<x3:e => e.'k>.[['j^'j].<x4:e => 0>.*]a.a<x5:e => e.*>.'j;"
               "'j->(x2;'k->x2)^'k].('i^'i)]a.'i^'i)");
    Memory m;
    m.push(Location("a"), P("'k"));
    m.push(Location("a"), P("'k"));
    auto r = run(t, m, 5000);
    EXPECT_EQ(r.kind, RunResult::FuelExhausted);
    EXPECT_LT(r.steps, 5000u);
}
