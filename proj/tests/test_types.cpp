#include "common.hpp"
#include "fmc/harness.hpp"
#include "fmc/machine.hpp"
#include "fmc/rewrite.hpp"

using namespace fmc;
using namespace fmc::test;

namespace {

MemType M(const std::string& s) { return T(s + " => 0").in; }

GenConfig typed(std::uint64_t seed) { return suite_config("subject-reduction", seed); }

// s2 below s1 on every location.
MemType below(const MemType& s2, const MemType& s1) {
    MemType out = s1;
    for (const auto& [loc, st] : s2.at) {
        StackType v = st;
        const auto& top = s1.get(loc);
        v.insert(v.end(), top.begin(), top.end());
        out.set(loc, v);
    }
    return out;
}

SumType expand_sum(const SumType& s, const MemType& e) {
    SumType out;
    for (const auto& [c, m] : s.branch) out.branch[c] = expand(m, e);
    return out;
}

// Does the final memory fit the branch type entry by entry?
::testing::AssertionResult memory_fits(const Memory& mem, const MemType& ty) {
    std::size_t locs = 0;
    for (const auto& [loc, st] : mem.stacks) {
        if (st.empty()) continue;
        ++locs;
        const auto& want = ty.get(loc);
        if (want.size() != st.size())
            return ::testing::AssertionFailure() << "stack " << display(loc) << " has " << st.size() << " entries";
        for (std::size_t i = 0; i < st.size(); ++i) {
            try {
                check({}, st[i], want[i]);
            } catch (const TypeError& e) {
                return ::testing::AssertionFailure() << print(st[i]) << ": " << e.what();
            }
        }
    }
    if (locs != ty.at.size()) return ::testing::AssertionFailure() << "missing stacks";
    return ::testing::AssertionSuccess();
}

}  // namespace

TEST(Expand, Examples) {
    EXPECT_EQ(expand(T("e => e.'*"), M("a(Z)")), T("a(Z) => a(Z).'*"));
    ValueType t = T("Z => B.'i + a(Z).'j");
    EXPECT_EQ(expand(t, MemType{}), t);
    EXPECT_EQ(expand(t, M("B")), T("Z B => B B.'i + a(Z) B.'j"));
}

TEST(Include, Examples) {
    SumType j;
    j.branch[ChoiceLabel("j")] = {};
    EXPECT_EQ(include(T("e => e.'i"), j), T("e => e.'i + e.'j"));
    EXPECT_EQ(include(T("e => e.'i"), SumType{}), T("e => e.'i"));
    EXPECT_THROW(include(T("e => e.'j"), j), TypeError);
}

TEST(TypeAlgebra, ExpandComposesAndCommutesWithInclude) {
    GenConfig c = typed(21);
    for (std::uint64_t k = 0; k < 300; ++k) {
        Rng rng = item_rng(21, k);
        ValueType t = gen_type(c, rng, 2);
        MemType s1 = gen_type(c, rng, 1).in, s2 = gen_type(c, rng, 1).in;
        ASSERT_EQ(expand(expand(t, s1), s2), expand(t, below(s2, s1))) << print_type(t);

        SumType extra;
        for (const auto& [l, m] : gen_type(c, rng, 1).out.branch)
            if (!t.out.has(l)) extra.branch[l] = m;
        ASSERT_EQ(include(expand(t, s1), expand_sum(extra, s1)), expand(include(t, extra), s1)) << print_type(t);
    }
}

TEST(MatchTypes, Examples) {
    auto m = match_types(T("e => e.'*"), T("a(Z) => a(Z).'*"));
    ASSERT_TRUE(m);
    EXPECT_EQ(m->e1, M("a(Z)"));
    EXPECT_TRUE(m->e2.empty());

    ValueType t = T("Z => B.'i");
    auto same = match_types(t, t);
    ASSERT_TRUE(same);
    EXPECT_TRUE(same->e1.empty());
    EXPECT_TRUE(same->e2.empty());

    EXPECT_FALSE(match_types(T("Z => e.'*"), T("B => e.'*")));
}

TEST(MatchTypes, ResultEqualizes) {
    GenConfig c = typed(22);
    std::size_t matched = 0;
    for (std::uint64_t k = 0; k < 300; ++k) {
        Rng rng = item_rng(22, k);
        ValueType t1 = gen_type(c, rng, 2);
        ValueType t2 = expand(t1, gen_type(c, rng, 1).in);
        auto m = match_types(t1, t2);
        ASSERT_TRUE(m) << print_type(t1) << " / " << print_type(t2);
        ASSERT_EQ(expand(t1, m->e1), expand(t2, m->e2));
        ++matched;
    }
    EXPECT_EQ(matched, 300u);
}

TEST(Synthesize, Examples) {
    EXPECT_EQ(synthesize({}, P("'i")), T("e => e.'i"));
    EXPECT_EQ(synthesize({}, P("('i)^'i")), T("e => 0"));
    EXPECT_EQ(synthesize({}, P("<x:Z>.<y:B>.[x].[y].*")), T("Z B => Z B.'*"));
    EXPECT_EQ(synthesize({}, P("'i;'i->'j")), T("e => e.'j"));
    Context g{{"f", T("Z => e.'*")}};
    EXPECT_EQ(synthesize(g, P("f")), T("Z => e.'*"));
}

TEST(Synthesize, Errors) {
    EXPECT_THROW(synthesize({}, P("<x>.x")), TypeError);
    EXPECT_THROW(synthesize({}, P("x")), TypeError);
    // f wants a Z on top but receives itself.
    EXPECT_THROW(synthesize({}, P("<f:Z => e.'*>.[f].f")), TypeError);
    try {
        synthesize({}, P("'i;\n  'j->x"));
        FAIL();
    } catch (const TypeError& e) {
        EXPECT_EQ(e.pos.line, 2);
    }
}

TEST(Subsume, Examples) {
    EXPECT_TRUE(subsume(T("e => e.'*"), T("a(Z) => a(Z).'*")));
    ValueType t = T("Z => B.'i");
    EXPECT_TRUE(subsume(t, t));
    EXPECT_FALSE(subsume(T("e => e.'i"), T("e => e.'j")));
    EXPECT_TRUE(subsume(T("e => e.'i"), T("e => e.'i + e.'j")));
    EXPECT_FALSE(subsume(T("e => e.'i + e.'j"), T("e => e.'i")));
}

TEST(Check, Examples) {
    EXPECT_NO_THROW(check({}, P("*"), T("Z => Z.'*")));
    EXPECT_THROW(check({}, P("'i"), T("e => e.'j")), TypeError);
    EXPECT_NO_THROW(check({}, P("('i)^'i"), T("a(Z) => 0")));
}

TEST(Check, AgreesWithSubsumption) {
    GenConfig c = typed(23);
    for (std::uint64_t k = 0; k < 300; ++k) {
        Rng rng = item_rng(23, k);
        Term t = gen_term(c, rng);
        ValueType ty = synthesize({}, t);
        MemType e = gen_type(c, rng, 1).in;
        ASSERT_NO_THROW(check({}, t, ty)) << print(t);
        ASSERT_NO_THROW(check({}, t, expand(ty, e))) << print(t);
    }
}

TEST(TypeState, Examples) {
    EXPECT_EQ(type_state(State{{}, P("'i"), {}}), T("e => e.'i"));
    EXPECT_EQ(type_state(State{{}, P("*"), {{ChoiceLabel::star(), P("'i")}}}), T("e => e.'i"));
    EXPECT_THROW(type_state(State{{}, P("x"), {}}), TypeError);
    Memory m;
    m.push(Location("a"), P("'n3"));
    EXPECT_EQ(type_state(State{m, P("a<x:Z>.[x]a.*"), {}}), T("e => a(Z).'*"));
}

TEST(Inhabit, Examples) {
    EXPECT_TRUE(AlphaEq(inhabit(T("e => e.'i")), P("'i")));
    EXPECT_TRUE(AlphaEq(inhabit(T("(e => e.'*) => e.'*")), P("<_:e => e.'*>.*")));
    EXPECT_TRUE(AlphaEq(inhabit(T("e => 0")), P("(*)^'*")));
    // Least label in the fixed order: the default choice comes first.
    EXPECT_TRUE(AlphaEq(inhabit(T("e => e.'j + e.'*")), P("*")));
}

TEST(Inhabit, ChecksAgainstItsType) {
    GenConfig c = typed(24);
    for (std::uint64_t k = 0; k < 500; ++k) {
        Rng rng = item_rng(24, k);
        ValueType t = gen_type(c, rng, 2);
        ASSERT_NO_THROW(check({}, inhabit(t), t)) << print_type(t);
        ASSERT_EQ(inhabitation_property(t).outcome, Outcome::Pass);
    }
}

TEST(Inhabit, ZeroMemoryMatchesType) {
    MemType m = M("a(Z B) Z");
    Memory z = zero_memory(m);
    ASSERT_EQ(z.stacks.at(Location("a")).size(), 2u);
    ASSERT_EQ(z.stacks.at(Location()).size(), 1u);
    EXPECT_TRUE(memory_fits(z, m));
}

// Well-typed terms do not go wrong: from a zero memory of the input type the
// machine never gets stuck, and a final state fits the synthesized output.
TEST(Soundness, RunsFitSynthesizedTypes) {
    std::size_t finals = 0;
    for (std::uint64_t seed : {25u, 26u}) {
        GenConfig c = typed(seed);
        for (std::uint64_t k = 0; k < 500; ++k) {
            Rng rng = item_rng(seed, k);
            Term t = gen_term(c, rng);
            ValueType ty = synthesize({}, t);
            auto r = run(t, zero_memory(ty.in), 10000);
            ASSERT_NE(r.kind, RunResult::Stuck) << print(t) << " : " << print_type(ty);
            if (r.kind != RunResult::Final) continue;
            ++finals;
            ASSERT_TRUE(ty.out.has(r.choice)) << print(t) << " : " << print_type(ty);
            ASSERT_TRUE(memory_fits(r.state.mem, ty.out.branch.at(r.choice))) << print(t) << " : " << print_type(ty);
        }
    }
    EXPECT_GT(finals, 500u);
}

TEST(SubjectReduction, OneStepReducts) {
    GenConfig c = typed(27);
    for (std::uint64_t k = 0; k < 300; ++k) {
        Rng rng = item_rng(27, k);
        Term t = gen_term(c, rng);
        ValueType ty = synthesize({}, t);
        for (const auto& r : redexes(t)) {
            Term u = apply(t, r.path, r.rule);
            ASSERT_NO_THROW(check({}, u, ty)) << print(t) << " --" << rule_name(r.rule) << "--> " << print(u);
        }
    }
}

// Reducts that once failed to re-check: unreachable handlers and values whose
// stored types were widened by a join.
TEST(SubjectReduction, Regressions) {
    const char* tt = "b((e => e.*)) => (e => e.'i) a((e => e.'k)) b((e => e.*)).*";
    const char* ut = "(e => e.'i) => (e => e.'i) (e => e.'i) b((e => e.'j) (e => e.*)).* + a((e => e.*)).'j";
    const std::pair<std::string, std::string> cases[] = {
        {"*;'k->('k;*);'k-><x9:e => e.'j>.*;b<x12:(e => e.'j) b((e => e.'j) (e => e.'j)) => 0>.*",
         "*;'k->('k;*;'k-><x9:e => e.'j>.*);b<x12:(e => e.'j) b((e => e.'j) (e => e.'j)) => 0>.*"},
        {"a<x1:e => e.'j>.(<x2:e => e.'i>.(x2^'i;<x7:e => e.'j>.[*].([*].'i;'j->(x1;'j->b<x15:e => e.'j>.['k].'i)));'i->*)",
         "a<x1:e => e.'j>.(<x2:e => e.'i>.(x2^'i;<x7:e => e.'j>.[*].[*].('i;'j->(x1;'j->b<x15:e => e.'j>.['k].'i)));'i->*)"},
        {std::string("'j;'i->[<x4:e => e.'i>.'k].a<x5:e => e.'j>.x5;'k-><x6:") + tt + ">.([x6].*;('j;'k->x6))",
         std::string("'j;'k-><x6:") + tt + ">.([x6].*;('j;'k->x6))"},
        {std::string("b<x1:e => e.'i>.*;'i->('j;a<x2:e => e.'k>.<x3:") + ut + ">.'i);'i->(a<x4:e => e.'i>.x4;'i->*)",
         std::string("b<x1:e => e.'i>.*;'i->('j;a<x2:e => e.'k>.<x3:") + ut + ">.'i;'i->(a<x4:e => e.'i>.x4;'i->*))"},
    };
    for (const auto& [before, after] : cases) {
        ValueType ty = synthesize({}, P(before));
        EXPECT_NO_THROW(check({}, P(after), ty)) << after;
    }
}
