#include <random>

#include "common.hpp"
#include "fmc/eval.hpp"
#include "fmc/harness.hpp"
#include "fmc/rewrite.hpp"

using namespace fmc;
using namespace fmc::test;

namespace {

GenConfig untyped(std::uint64_t seed, std::size_t size = 25, double loops = 0.0) {
    GenConfig c;
    c.seed = seed;
    c.max_size = size;
    c.loop_prob = loops;
    return c;
}

using Measure = std::pair<std::size_t, std::size_t>;

bool lex_less(Measure a, Measure b) { return a < b; }

}  // namespace

TEST(Redexes, Examples) {
    auto r = redexes(P("[N]a.a<x>.M"));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_TRUE(r[0].path.empty());
    EXPECT_EQ(r[0].rule, RRule::Beta);

    r = redexes(P("'i;'i->M"));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].rule, RRule::Select);

    EXPECT_TRUE(redexes(P("*")).empty());
}

TEST(Redexes, SideConditions) {
    // Passage needs a != b and x not free in the argument.
    EXPECT_EQ(redex_at(P("[N]b.a<x>.M")), RRule::Passage);
    EXPECT_FALSE(redex_at(P("[x]b.a<x>.M")));
    EXPECT_EQ(redex_at(P("[N]a.a<x>.M")), RRule::Beta);
    // Prefix-pop needs x not free in the handler.
    EXPECT_EQ(redex_at(P("(a<x>.M);'i->N")), RRule::PrefixPop);
    EXPECT_FALSE(redex_at(P("(a<x>.M);'i->x")));
    EXPECT_EQ(redex_at(P("([N]a.M);'i->Q")), RRule::PrefixPush);
    EXPECT_EQ(redex_at(P("(M;'i->N);'i->Q")), RRule::Associate);
    EXPECT_FALSE(redex_at(P("(M;'i->N);'j->Q")));
    EXPECT_EQ(redex_at(P("'i;'j->M")), RRule::Reject);
    EXPECT_EQ(redex_at(P("M^'i")), RRule::Unroll);
    EXPECT_FALSE(redex_at(P("M;'i->N")));
}

TEST(Redexes, OrderAndUnrollFilter) {
    Term t = P("[['i].<x>.x].(('j;'j->*)^'k)");
    auto all = redexes(t);
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].rule, RRule::Beta);
    EXPECT_EQ(all[0].path, (RedexPath{0}));
    EXPECT_EQ(all[1].rule, RRule::Unroll);
    EXPECT_EQ(all[1].path, (RedexPath{1}));
    EXPECT_EQ(all[2].rule, RRule::Select);
    EXPECT_EQ(all[2].path, (RedexPath{1, 0}));
    EXPECT_EQ(redexes(t, false).size(), 2u);
}

TEST(Apply, Examples) {
    EXPECT_TRUE(AlphaEq(apply(P("['i].<x>.x"), {}, RRule::Beta), P("'i")));
    EXPECT_TRUE(AlphaEq(apply(P("x^'i"), {}, RRule::Unroll), P("x;'i->x^'i")));
    EXPECT_TRUE(AlphaEq(apply(P("'i;'j->M"), {}, RRule::Reject), P("'i")));
    EXPECT_TRUE(AlphaEq(apply(P("[N]b.a<x>.M"), {}, RRule::Passage), P("a<x>.[N]b.M")));
    EXPECT_TRUE(AlphaEq(apply(P("(a<x>.M);'i->N"), {}, RRule::PrefixPop), P("a<x>.(M;'i->N)")));
    EXPECT_TRUE(AlphaEq(apply(P("([N]a.M);'i->Q"), {}, RRule::PrefixPush), P("[N]a.(M;'i->Q)")));
    EXPECT_TRUE(AlphaEq(apply(P("(M;'i->N);'i->Q"), {}, RRule::Associate), P("M;'i->(N;'i->Q)")));
    EXPECT_TRUE(AlphaEq(apply(P("[P]b.(['i].<x>.x)"), {1}, RRule::Beta), P("[P]b.'i")));
}

TEST(Apply, Errors) {
    EXPECT_THROW(apply(P("*"), {}, RRule::Beta), RewriteError);
    EXPECT_THROW(apply(P("['i].<x>.x"), {}, RRule::Select), RewriteError);
    EXPECT_THROW(apply(P("['i].<x>.x"), {2}, RRule::Beta), RewriteError);
}

TEST(WeakHead, Examples) {
    auto a = weak_head_step(P("[P]a.(['i].<x>.x)"));
    ASSERT_TRUE(a);
    EXPECT_TRUE(AlphaEq(*a, P("[P]a.'i")));
    EXPECT_FALSE(weak_head_step(P("<x>.(['i].<y>.y)")));
    auto c = weak_head_step(P("*;'*->M"));
    ASSERT_TRUE(c);
    EXPECT_TRUE(AlphaEq(*c, P("M")));
    // The argument of a push is not a head position.
    EXPECT_FALSE(weak_head_step(P("[['i].<x>.x].*")));
}

TEST(AffineNormalize, Examples) {
    EXPECT_TRUE(AlphaEq(affine_normalize(P("([M].*);'*->N")), P("[M].N")));
    EXPECT_TRUE(AlphaEq(affine_normalize(P("[N]b.a<x>.M")), P("a<x>.[N]b.M")));
    EXPECT_TRUE(AlphaEq(affine_normalize(P("*")), P("*")));
    // Duplicating redexes are left alone.
    EXPECT_TRUE(AlphaEq(affine_normalize(P("['i].<x>.x")), P("['i].<x>.x")));
}

TEST(AffineMeasure, Examples) {
    EXPECT_EQ(affine_measure(P("*")), Measure(0, 0));
    EXPECT_EQ(affine_measure(P("(<x>.y);'i->z")), Measure(2, 0));
    EXPECT_EQ(affine_measure(P("<x>.(y;'i->z)")), Measure(1, 0));
    auto before = affine_measure(P("[N]b.a<x>.M"));
    auto after = affine_measure(P("a<x>.[N]b.M"));
    EXPECT_EQ(before.first, after.first);
    EXPECT_LT(after.second, before.second);
}

TEST(AffineMeasure, DecreasesAlongAffineSteps) {
    for (std::uint64_t k = 0; k < 500; ++k) {
        Rng rng = item_rng(11, k);
        Term t = gen_term(untyped(11, 30, 0.1), rng);
        for (int n = 0; n < 100; ++n) {
            std::vector<Redex> aff;
            for (auto& r : redexes(t))
                if (affine(r.rule)) aff.push_back(r);
            if (aff.empty()) break;
            const Redex& r = aff[std::uniform_int_distribution<std::size_t>(0, aff.size() - 1)(rng)];
            Term u = apply(t, r.path, r.rule);
            ASSERT_TRUE(lex_less(affine_measure(u), affine_measure(t))) << print(t) << " " << rule_name(r.rule);
            t = u;
        }
    }
}

TEST(AffineNormalize, UniqueNormalForm) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        Rng rng = item_rng(12, k);
        Term t = gen_term(untyped(12, 30, 0.1), rng);
        Term u = t;
        for (;;) {
            std::vector<Redex> aff;
            for (auto& r : redexes(u))
                if (affine(r.rule)) aff.push_back(r);
            if (aff.empty()) break;
            const Redex& r = aff[std::uniform_int_distribution<std::size_t>(0, aff.size() - 1)(rng)];
            u = apply(u, r.path, r.rule);
        }
        ASSERT_TRUE(AlphaEq(u, affine_normalize(t))) << print(t);
    }
}

TEST(Normalize, Examples) {
    auto a = normalize(P("(['i].*);'*-><x>.x"), 100);
    EXPECT_FALSE(a.exhausted);
    EXPECT_TRUE(AlphaEq(a.term, P("'i")));
    EXPECT_TRUE(AlphaEq(normalize(P("x"), 100).term, P("x")));
    auto c = normalize(P("('i)^'i"), 100);
    EXPECT_FALSE(c.exhausted);
    EXPECT_TRUE(AlphaEq(c.term, P("('i)^'i")));
}

TEST(Normalize, BoundedUnroll) {
    auto r = normalize(P("('i)^'i"), 100, UnrollPolicy::Bounded(2));
    EXPECT_FALSE(r.exhausted);
    EXPECT_TRUE(AlphaEq(r.term, P("('i)^'i")));
    auto s = normalize(P("('j)^'i"), 100, UnrollPolicy::Bounded(1));
    EXPECT_TRUE(AlphaEq(s.term, P("'j")));
}

TEST(Normalize, FuelAndTrace) {
    Term omega = P("[<f>.[f].f].<f>.[f].f");
    auto r = normalize(omega, 50);
    EXPECT_TRUE(r.exhausted);
    EXPECT_EQ(r.steps, 50u);

    ReductionTrace tr;
    auto s = normalize(P("(['i].*);'*-><x>.x"), 100, UnrollPolicy::Forbid(), &tr);
    ASSERT_EQ(tr.size(), s.steps);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(tr[i].n, i + 1);
        EXPECT_TRUE(AlphaEq(apply(tr[i].before, tr[i].path, tr[i].rule), tr[i].after));
        if (i > 0) EXPECT_TRUE(AlphaEq(tr[i - 1].after, tr[i].before));
    }
    EXPECT_NE(reduction_json(tr).find("\"rule\""), std::string::npos);
    EXPECT_NE(reduction_text(tr).find("1."), std::string::npos);
}

TEST(Normalize, LetChainTakesThreeSteps) {
    // let x = return M in N, with M = 'i and N = [x]a.*
    ReductionTrace tr;
    auto r = normalize(P("(['i].*);'*-><x>.[x]a.*"), 100, UnrollPolicy::Forbid(), &tr);
    ASSERT_EQ(r.steps, 3u);
    EXPECT_EQ(tr[0].rule, RRule::PrefixPush);
    EXPECT_EQ(tr[1].rule, RRule::Select);
    EXPECT_EQ(tr[2].rule, RRule::Beta);
    EXPECT_TRUE(AlphaEq(r.term, P("['i]a.*")));
}

TEST(Normalize, PreservesEvaluation) {
    for (std::uint64_t k = 0; k < 400; ++k) {
        Rng rng = item_rng(13, k);
        Term t = gen_term(untyped(13, 25, 0.15), rng);
        auto before = eval_big(t, {}, 5000);
        if (before.kind != EvalResult::Value) continue;
        auto n = normalize(t, 200, UnrollPolicy::Bounded(2));
        auto after = eval_big(n.term, {}, 20000);
        ASSERT_EQ(after.kind, EvalResult::Value) << print(t);
        ASSERT_EQ(after.choice, before.choice) << print(t);
    }
}

TEST(CompleteDevelopment, Examples) {
    EXPECT_TRUE(AlphaEq(complete_development(P("['i].<x>.x")), P("'i")));
    EXPECT_TRUE(AlphaEq(complete_development(P("x")), P("x")));
    EXPECT_TRUE(AlphaEq(complete_development(P("x^'i")), P("x;'i->x^'i")));
    // Nested redexes are developed inside-out.
    EXPECT_TRUE(AlphaEq(complete_development(P("[['i].<y>.y].<x>.[x].<z>.z")), P("'i")));
}

TEST(CompleteStep, Examples) {
    EXPECT_TRUE(AlphaEq(complete_step(P("*")), P("*")));
    // The developed body is 'i;'*->N, which rejects rather than selects.
    EXPECT_TRUE(AlphaEq(complete_step(P("(['i].<x>.x);'*->N")), P("'i")));
    EXPECT_TRUE(AlphaEq(complete_step(P("(['*].<x>.x);'*->N")), P("N")));
    EXPECT_TRUE(AlphaEq(complete_step(P("['j].<x>.(x;'j->'k)")), P("'k")));
}

TEST(MarkedReduct, SingleMarkIsOneStep) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        Rng rng = item_rng(14, k);
        Term t = gen_term(untyped(14, 25, 0.1), rng);
        for (auto& r : redexes(t)) {
            if (!duplicating(r.rule)) continue;
            ASSERT_TRUE(AlphaEq(marked_reduct(t, {r.path}), apply(t, r.path, r.rule))) << print(t);
        }
    }
    EXPECT_THROW(marked_reduct(P("'i;'i->*"), {{}}), RewriteError);
}

TEST(CanonicalPushes, Permutation) {
    EXPECT_TRUE(AlphaEq(canonical_pushes(P("[M]b.[N]a.*")), canonical_pushes(P("[N]a.[M]b.*"))));
    EXPECT_FALSE(AlphaEq(canonical_pushes(P("[M]a.[N]a.*")), canonical_pushes(P("[N]a.[M]a.*"))));
}

TEST(Rewrite, DeterministicNames) {
    Term t = P("[y].<x>.<y>.[x].[y].*");
    EXPECT_EQ(print(apply(t, {}, RRule::Beta)), print(apply(t, {}, RRule::Beta)));
    EXPECT_EQ(print(complete_development(t)), print(complete_development(t)));
}
