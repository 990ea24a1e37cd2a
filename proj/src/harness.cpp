#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fmc/eval.hpp"
#include "fmc/harness.hpp"
#include "fmc/machine.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/types.hpp"
#include "json.hpp"

namespace fmc {

void validate(const GenConfig& cfg) {
    if (cfg.max_size < 1) throw std::invalid_argument("max size must be at least 1");
    if (cfg.locations < 1) throw std::invalid_argument("location alphabet must be nonempty");
    if (cfg.choices < 1) throw std::invalid_argument("choice alphabet must be nonempty");
    if (cfg.locations > 27 || cfg.choices > 18) throw std::invalid_argument("alphabet too large");
    if (!(cfg.loop_prob >= 0.0 && cfg.loop_prob <= 1.0)) throw std::invalid_argument("loop probability outside [0,1]");
}

Rng item_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

namespace {

std::size_t below(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

Location loc_at(std::size_t k) { return k == 0 ? Location() : Location(std::string(1, static_cast<char>('a' + k - 1))); }
ChoiceLabel choice_at(std::size_t k) {
    return k == 0 ? ChoiceLabel::star() : ChoiceLabel(std::string(1, static_cast<char>('h' + k)));
}

Location rand_loc(const GenConfig& c, Rng& rng) { return loc_at(below(rng, c.locations)); }
ChoiceLabel rand_choice(const GenConfig& c, Rng& rng) { return choice_at(below(rng, c.choices)); }

MemType rand_mem(const GenConfig& c, Rng& rng, std::size_t depth, double p_default, double p_other) {
    MemType m;
    for (std::size_t k = 0; k < c.locations; ++k) {
        if (!coin(rng, k == 0 ? p_default : p_other)) continue;
        StackType st;
        std::size_t len = 1 + below(rng, 2);
        for (std::size_t j = 0; j < len; ++j) st.push_back(gen_type(c, rng, depth));
        m.set(loc_at(k), std::move(st));
    }
    return m;
}

}  // namespace

ValueType gen_type(const GenConfig& c, Rng& rng, std::size_t depth) {
    ValueType t;
    if (depth == 0) {
        t.out.branch[rand_choice(c, rng)] = MemType{};
        return t;
    }
    t.in = rand_mem(c, rng, depth - 1, 0.5, 0.2);
    if (c.allow_void && coin(rng, 0.1)) return t;
    std::size_t nb = 1 + below(rng, std::min<std::size_t>(2, c.choices));
    while (t.out.branch.size() < nb) t.out.branch[rand_choice(c, rng)] = rand_mem(c, rng, depth - 1, 0.5, 0.2);
    return t;
}

ValueType gen_type(const GenConfig& cfg) {
    validate(cfg);
    Rng rng = item_rng(cfg.seed, 0);
    return gen_type(cfg, rng, cfg.type_depth);
}

namespace {

class UntypedGen {
public:
    UntypedGen(const GenConfig& c, Rng& r) : c_(c), rng_(r) {}

    Term go(std::size_t n) {
        if (n <= 1) return leaf();
        if (coin(rng_, c_.loop_prob)) return loop(go(n - 1), rand_choice(c_, rng_));
        switch (below(rng_, 6)) {
            case 0: {
                if (n < 3) return binder(rand_loc(c_, rng_), n - 1);
                std::size_t a = 1 + below(rng_, n - 2);
                Term arg = go(a);
                return push(arg, rand_loc(c_, rng_), go(n - 1 - a));
            }
            case 1: return binder(rand_loc(c_, rng_), n - 1);
            case 2:
            case 3: {
                if (n < 3) return binder(rand_loc(c_, rng_), n - 1);
                std::size_t a = 1 + below(rng_, n - 2);
                Term m = go(a);
                return kase(m, rand_choice(c_, rng_), go(n - 1 - a));
            }
            case 4: {
                if (n < 4) return leaf();
                std::size_t a = 1 + below(rng_, n - 3);
                Location l = rand_loc(c_, rng_);
                Term arg = go(a);
                Location l2 = coin(rng_, 0.6) ? l : rand_loc(c_, rng_);
                return push(arg, l, binder(l2, n - 2 - a));
            }
            default: {
                if (n < 3) return leaf();
                return kase(choice(rand_choice(c_, rng_)), rand_choice(c_, rng_), go(n - 2));
            }
        }
    }

private:
    const GenConfig& c_;
    Rng& rng_;
    std::vector<Identifier> scope_;
    int next_ = 0;

    Term leaf() {
        if (!scope_.empty() && coin(rng_, 0.5)) return var(scope_[below(rng_, scope_.size())]);
        return choice(rand_choice(c_, rng_));
    }

    Term binder(Location l, std::size_t n) {
        Identifier x = "x" + std::to_string(++next_);
        scope_.push_back(x);
        Term body = go(std::max<std::size_t>(1, n));
        scope_.pop_back();
        return pop(l, x, body);
    }
};

class TypedGen {
public:
    TypedGen(const GenConfig& c, Rng& r) : c_(c), rng_(r) {}

    struct R {
        Term t;
        ValueType ty;
    };

    R go(std::size_t n) {
        if (n <= 1) return leaf();
        if (coin(rng_, c_.loop_prob)) {
            if (auto r = looped(n)) return *r;
        }
        switch (below(rng_, 7)) {
            case 0: return binder(n);
            case 1:
            case 2: return pushed(n);
            case 3:
            case 4: return redex(n);
            default: return cased(n);
        }
    }

private:
    const GenConfig& c_;
    Rng& rng_;
    std::vector<std::pair<Identifier, ValueType>> scope_;
    int next_ = 0;

    Context ctx() const {
        Context g;
        for (const auto& [x, t] : scope_) g[x] = t;
        return g;
    }

    std::optional<ValueType> syn(const Term& t) const {
        try {
            return synthesize(ctx(), t);
        } catch (const TypeError&) {
            return std::nullopt;
        }
    }

    R leaf() {
        if (!scope_.empty() && coin(rng_, 0.4)) {
            const auto& [x, t] = scope_[below(rng_, scope_.size())];
            return {var(x), t};
        }
        Term t = choice(rand_choice(c_, rng_));
        return {t, *syn(t)};
    }

    ValueType annotation() {
        if (!scope_.empty() && coin(rng_, 0.3)) return scope_[below(rng_, scope_.size())].second;
        return gen_type(c_, rng_, below(rng_, 2));
    }

    template <class F>
    R with_var(const Identifier& x, const ValueType& t, F&& f) {
        scope_.emplace_back(x, t);
        R r = f();
        scope_.pop_back();
        return r;
    }

    R binder(std::size_t n) {
        ValueType a = annotation();
        Identifier x = "x" + std::to_string(++next_);
        Location l = rand_loc(c_, rng_);
        R body = with_var(x, a, [&] { return go(n - 1); });
        Term t = pop(l, x, body.t, std::make_shared<const ValueType>(a));
        return {t, *syn(t)};
    }

    R argument(std::size_t n) {
        if (!scope_.empty() && coin(rng_, 0.3)) {
            const auto& [x, t] = scope_[below(rng_, scope_.size())];
            return {var(x), t};
        }
        return go(n);
    }

    R pushed(std::size_t n) {
        if (n < 3) return binder(n);
        std::size_t a = 1 + below(rng_, n - 2);
        R arg = argument(a);
        R body = go(n - 1 - a);
        Location l = rand_loc(c_, rng_);
        Term t = push(arg.t, l, body.t);
        if (auto ty = syn(t)) return {t, *ty};
        const StackType& st = body.ty.in.get(l);
        if (!st.empty()) {
            t = push(inhabit(st.back()), l, body.t);
            if (size(t) <= n && (c_.loop_prob > 0.0 || loop_free(t)))
                if (auto ty = syn(t)) return {t, *ty};
        }
        return body;
    }

    R redex(std::size_t n) {
        if (n < 4) return binder(n);
        std::size_t a = 1 + below(rng_, n - 3);
        R arg = argument(a);
        Identifier x = "x" + std::to_string(++next_);
        Location l = rand_loc(c_, rng_);
        R body = with_var(x, arg.ty, [&] { return go(n - 2 - a); });
        Term t = push(arg.t, l, pop(l, x, body.t, std::make_shared<const ValueType>(arg.ty)));
        if (auto ty = syn(t)) return {t, *ty};
        Term bare = pop(l, x, body.t, std::make_shared<const ValueType>(arg.ty));
        return {bare, *syn(bare)};
    }

    R cased(std::size_t n) {
        if (n < 3) return binder(n);
        std::size_t a = 1 + below(rng_, n - 2);
        R m = go(a);
        std::vector<ChoiceLabel> labels;
        for (const auto& [c, _] : m.ty.out.branch) labels.push_back(c);
        for (int attempt = 0; attempt < 3; ++attempt) {
            ChoiceLabel i = !labels.empty() && coin(rng_, 0.85) ? labels[below(rng_, labels.size())]
                                                                : rand_choice(c_, rng_);
            R h = go(n - 1 - a);
            Term t = kase(m.t, i, h.t);
            if (auto ty = syn(t)) return {t, *ty};
        }
        return m;
    }

    std::optional<R> looped(std::size_t n) {
        R m = go(n - 1);
        std::vector<ChoiceLabel> labels;
        for (const auto& [c, _] : m.ty.out.branch) labels.push_back(c);
        std::shuffle(labels.begin(), labels.end(), rng_);
        for (const auto& i : labels) {
            Term t = loop(m.t, i);
            if (auto ty = syn(t)) {
                if (!c_.allow_void && ty->out.branch.empty()) continue;
                return R{t, *ty};
            }
        }
        return std::nullopt;
    }
};

}  // namespace

Term gen_term(const GenConfig& cfg, Rng& rng) {
    validate(cfg);
    std::size_t n = 1 + below(rng, cfg.max_size);
    if (!cfg.typed) return UntypedGen(cfg, rng).go(n);
    return TypedGen(cfg, rng).go(n).t;
}

Term gen_term(const GenConfig& cfg) {
    Rng rng = item_rng(cfg.seed, 0);
    return gen_term(cfg, rng);
}

namespace {

constexpr std::size_t kFuel = 10000;

std::optional<ValueType> try_synth(const Term& t) {
    try {
        return synthesize({}, t);
    } catch (const TypeError&) {
        return std::nullopt;
    }
}

Memory input_memory(const Term& t) {
    auto ty = try_synth(t);
    return ty ? zero_memory(ty->in) : Memory{};
}

PropResult pass() { return {Outcome::Pass, {}}; }
PropResult discard(std::string why = {}) { return {Outcome::Discard, std::move(why)}; }
PropResult fail(std::string why) { return {Outcome::Fail, std::move(why)}; }

PropResult agreement(const Term& t, Rng&) {
    Memory m0 = input_memory(t);
    RunResult r = run(t, m0, kFuel);
    EvalResult e = eval_big(t, m0, kFuel);
    switch (r.kind) {
        case RunResult::Final:
            if (e.kind != EvalResult::Value) return fail("machine final, evaluation not a value");
            if (!(e.choice == r.choice)) return fail("choices differ");
            if (!alpha_eq(e.mem, r.state.mem)) return fail("memories differ");
            if (e.steps != r.steps) return fail("step counts differ");
            return pass();
        case RunResult::Stuck:
            if (e.kind != EvalResult::Failed) return fail("machine stuck, evaluation did not fail");
            if (e.reason != r.reason) return fail("failure reasons differ");
            return pass();
        case RunResult::FuelExhausted:
            if (e.kind != EvalResult::Diverged) return fail("machine out of fuel, evaluation did not diverge");
            return pass();
    }
    return pass();
}

// Every redex on the head spine: root, push continuations, case bodies.
std::vector<Redex> head_redexes(const Term& t) {
    std::vector<Redex> out;
    RedexPath path;
    const Term* cur = &t;
    for (;;) {
        if (auto r = redex_at(*cur)) out.push_back({path, *r});
        int next;
        if ((*cur)->kind == Kind::Push)
            next = 1;
        else if ((*cur)->kind == Kind::Case)
            next = 0;
        else
            return out;
        path.push_back(next);
        cur = &child(*cur, next);
    }
}

// Rearrangements of push chains on the head spine: for each chain and each of
// its locations, the pushes on that location are moved innermost.
std::vector<Term> push_variants(const Term& t) {
    std::vector<Term> out;
    RedexPath path;
    const Term* cur = &t;
    for (;;) {
        const Term& n = *cur;
        if (n->kind == Kind::Push) {
            std::vector<std::pair<Location, Term>> chain;
            const Term* c = cur;
            while ((*c)->kind == Kind::Push) {
                chain.emplace_back((*c)->loc, (*c)->a);
                c = &(*c)->b;
            }
            std::set<Location> locs;
            for (const auto& e : chain) locs.insert(e.first);
            if (locs.size() > 1) {
                for (const auto& l : locs) {
                    auto moved = chain;
                    std::stable_partition(moved.begin(), moved.end(), [&](const auto& e) { return e.first != l; });
                    Term r = *c;
                    for (std::size_t k = moved.size(); k-- > 0;) r = push(moved[k].second, moved[k].first, r);
                    out.push_back(replace_at(t, path, r));
                }
            }
            for (std::size_t k = 0; k < chain.size(); ++k) path.push_back(1);
            cur = c;
            if ((*cur)->kind != Kind::Case) return out;
        }
        if ((*cur)->kind != Kind::Case) return out;
        path.push_back(0);
        cur = &child(*cur, 0);
    }
}

// Search for head reductions from `from` to `to`, modulo permuting pushes on
// distinct locations. Rearrangements are free; depth bounds the reductions.
bool wh_reaches(const Term& from, const Term& to_term, std::size_t depth, std::size_t cap) {
    Term to = canonical_pushes(to_term);
    std::deque<std::pair<Term, std::size_t>> q{{from, 0}};
    std::set<std::string> visited;
    std::size_t seen = 0;
    while (!q.empty() && seen < cap) {
        auto [t, d] = q.front();
        q.pop_front();
        if (!visited.insert(print(t)).second) continue;
        ++seen;
        if (alpha_eq(canonical_pushes(t), to)) return true;
        for (const auto& u : push_variants(t)) q.emplace_front(u, d);
        if (d == depth) continue;
        for (const auto& r : head_redexes(t)) q.emplace_back(apply(t, r.path, r.rule), d + 1);
    }
    return false;
}

PropResult simulation(const Term& t, Rng&) {
    State s;
    s.term = t;
    s.mem = input_memory(t);
    for (std::size_t k = 0; k < 400; ++k) {
        Term before = readback(s);
        // A push may have to pass every pending case frame.
        std::size_t depth = 8 + s.cont.size();
        StepResult r = step(s);
        if (r.kind != StepResult::Next) return pass();
        Term after = readback(s);
        if (!wh_reaches(before, after, depth, 4000))
            return fail(std::string("transition ") + rule_name(r.rule) + " at step " + std::to_string(k + 1) +
                        ": " + print(before) + " does not head-reduce to " + print(after));
    }
    return pass();
}

Term random_reduct(const Term& t, Rng& rng, std::size_t steps, std::size_t max_unroll) {
    Term cur = t;
    std::size_t unrolls = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        auto rs = redexes(cur, unrolls < max_unroll);
        if (rs.empty()) break;
        const Redex& r = rs[below(rng, rs.size())];
        if (r.rule == RRule::Unroll) ++unrolls;
        cur = apply(cur, r.path, r.rule);
    }
    return cur;
}

// a →* b, decided through normal forms modulo loops; unrolls applied to a
// account for loops that the reduction of b has already opened.
bool reduces_to(const Term& a, const Term& b) {
    if (alpha_eq(a, b)) return true;
    auto nb = normalize(b, 50000);
    if (nb.exhausted) return false;
    std::deque<std::pair<Term, int>> q{{a, 0}};
    std::size_t seen = 0;
    while (!q.empty() && seen < 400) {
        auto [t, d] = q.front();
        q.pop_front();
        ++seen;
        auto na = normalize(t, 50000);
        if (!na.exhausted && alpha_eq(na.term, nb.term)) return true;
        if (d == 4) continue;
        for (const auto& r : redexes(na.term, true))
            if (r.rule == RRule::Unroll) q.emplace_back(apply(na.term, r.path, r.rule), d + 1);
    }
    return false;
}

bool memory_reduces(const Memory& a, const Memory& b) {
    if (a.stacks.size() != b.stacks.size()) return false;
    for (const auto& [loc, sa] : a.stacks) {
        auto it = b.stacks.find(loc);
        if (it == b.stacks.end() || it->second.size() != sa.size()) return false;
        for (std::size_t k = 0; k < sa.size(); ++k)
            if (!reduces_to(sa[k], it->second[k])) return false;
    }
    return true;
}

PropResult commutation(const Term& t, Rng& rng) {
    auto ty = try_synth(t);
    if (!ty) return discard("untyped");
    Memory m0 = zero_memory(ty->in);
    EvalResult e1 = eval_big(t, m0, 20000);
    if (e1.kind != EvalResult::Value) return discard("does not evaluate");
    Term u = random_reduct(t, rng, 1 + below(rng, 10), 2);
    EvalResult e2 = eval_big(u, m0, 200000);
    if (e2.kind != EvalResult::Value) return fail("reduct " + print(u) + " does not evaluate");
    if (!(e1.choice == e2.choice)) return fail("reduct " + print(u) + " exits with a different choice");
    if (!memory_reduces(e1.mem, e2.mem))
        return fail("reduct " + print(u) + ": memory " + print_memory(e1.mem) + " not related to " +
                    print_memory(e2.mem));
    return pass();
}

bool lex_less(std::pair<std::size_t, std::size_t> a, std::pair<std::size_t, std::size_t> b) { return a < b; }

PropResult affine_termination(const Term& t, Rng& rng) {
    Term cur = t;
    auto mu = affine_measure(cur);
    for (std::size_t k = 0;; ++k) {
        if (k > 200000) return fail("affine reduction did not terminate");
        std::vector<Redex> rs;
        for (auto& r : redexes(cur, false))
            if (affine(r.rule)) rs.push_back(r);
        if (rs.empty()) break;
        const Redex& r = rs[below(rng, rs.size())];
        Term next = apply(cur, r.path, r.rule);
        auto mv = affine_measure(next);
        if (!lex_less(mv, mu))
            return fail(std::string(rule_name(r.rule)) + " step " + print(cur) + " -> " + print(next) +
                        " does not decrease the measure");
        cur = next;
        mu = mv;
    }
    Term nf = affine_normalize(t);
    for (const auto& r : redexes(nf, false))
        if (affine(r.rule)) return fail("affine_normalize left a redex in " + print(nf));
    if (!alpha_eq(nf, cur)) return fail("affine normal forms differ: " + print(nf) + " vs " + print(cur));
    return pass();
}

std::optional<Term> random_normal_form(const Term& t, Rng& rng, std::size_t fuel) {
    Term cur = t;
    for (std::size_t k = 0; k < fuel; ++k) {
        auto rs = redexes(cur, false);
        if (rs.empty()) return cur;
        const Redex& r = rs[below(rng, rs.size())];
        cur = apply(cur, r.path, r.rule);
    }
    return std::nullopt;
}

PropResult confluence(const Term& t, Rng& rng) {
    if (!loop_free(t)) return discard("has loops");
    auto a = random_normal_form(t, rng, 100000);
    auto b = random_normal_form(t, rng, 100000);
    auto c = normalize(t, 100000);
    if (!a || !b || c.exhausted) return fail("normalization did not terminate");
    if (!alpha_eq(*a, *b)) return fail("normal forms differ: " + print(*a) + " vs " + print(*b));
    if (!alpha_eq(*a, c.term)) return fail("leftmost-outermost normal form differs: " + print(c.term));
    return pass();
}

std::vector<RedexPath> dup_redexes(const Term& t) {
    std::vector<RedexPath> out;
    for (auto& r : redexes(t, true))
        if (duplicating(r.rule)) out.push_back(r.path);
    return out;
}

PropResult diamond(const Term& t, Rng& rng) {
    auto dm = dup_redexes(t);
    std::set<RedexPath> marks;
    for (const auto& p : dm)
        if (coin(rng, 0.5)) marks.insert(p);
    Term n = affine_normalize(marked_reduct(t, marks));
    Term target = complete_step(t);
    auto dn = dup_redexes(n);
    if (dn.size() > 12) return discard("too many redexes to search");
    for (std::size_t mask = 0; mask < (std::size_t{1} << dn.size()); ++mask) {
        std::set<RedexPath> s;
        for (std::size_t k = 0; k < dn.size(); ++k)
            if (mask >> k & 1) s.insert(dn[k]);
        if (alpha_eq(affine_normalize(marked_reduct(n, s)), target)) return pass();
    }
    return fail("peak " + print(n) + " does not close at " + print(target));
}

PropResult subject_reduction(const Term& t, Rng&) {
    auto ty = try_synth(t);
    if (!ty) return discard("untyped");
    for (const auto& r : redexes(t, true)) {
        Term u = apply(t, r.path, r.rule);
        try {
            check({}, u, *ty);
        } catch (const TypeError& e) {
            return fail(std::string(rule_name(r.rule)) + " at " + path_string(r.path) + " gives " + print(u) +
                        ": " + e.what());
        }
    }
    return pass();
}

PropResult progress(const Term& t, Rng&) {
    auto ty = try_synth(t);
    if (!ty) return discard("untyped");
    RunResult r = run(t, zero_memory(ty->in), 5000);
    if (r.kind == RunResult::Stuck)
        return fail(std::string("stuck (") + reason_name(r.reason) + ") at " + print(r.state.term));
    return pass();
}

PropResult termination(const Term& t, Rng&) {
    if (!loop_free(t)) return discard("has loops");
    auto ty = try_synth(t);
    if (!ty) return discard("untyped");
    RunResult r = run(t, zero_memory(ty->in), 100000);
    if (r.kind != RunResult::Final)
        return fail(r.kind == RunResult::Stuck ? "stuck" : "fuel exhausted after 100000 steps");
    return pass();
}

PropResult measure(const Term& t, Rng& rng) {
    if (!loop_free(t)) return discard("has loops");
    auto ty = try_synth(t);
    if (!ty) return discard("untyped");
    Memory m0 = zero_memory(ty->in);
    Term cur = t;
    for (int walk = 0; walk < 12; ++walk) {
        auto mc = eval_measured(cur, m0, 200000);
        if (!mc.value) return fail("measured evaluation failed on " + print(cur) + ": " + mc.error);
        auto rs = redexes(cur, false);
        if (rs.empty()) break;
        for (const auto& r : rs) {
            Term u = apply(cur, r.path, r.rule);
            auto mu = eval_measured(u, m0, 200000);
            if (!mu.value) return fail("measured evaluation failed on reduct " + print(u) + ": " + mu.error);
            std::size_t a = mc.value->n, b = mu.value->n;
            bool ok = r.rule == RRule::Beta ? b < a : b <= a;
            if (!ok)
                return fail(std::string(rule_name(r.rule)) + " step " + print(cur) + " -> " + print(u) + " takes n " +
                            std::to_string(a) + " to " + std::to_string(b));
        }
        const Redex& r = rs[below(rng, rs.size())];
        cur = apply(cur, r.path, r.rule);
    }
    return pass();
}

}  // namespace

PropResult inhabitation_property(const ValueType& t) {
    Term z;
    try {
        z = inhabit(t);
        check({}, z, t);
    } catch (const TypeError& e) {
        return fail("zero term " + (z ? print(z) : std::string("?")) + " does not check: " + e.what());
    }
    if (!t.out.branch.empty()) {
        RunResult r = run(z, zero_memory(t.in), kFuel);
        if (r.kind != RunResult::Final) return fail("zero term " + print(z) + " does not reach a final state");
    }
    return pass();
}

std::vector<std::string> suite_names() {
    return {"agreement",         "agreement-untyped", "simulation", "commutation", "affine",      "confluence",
            "diamond",           "subject-reduction", "progress",   "termination", "measure",     "inhabitation"};
}

GenConfig suite_config(const std::string& name, std::uint64_t seed) {
    GenConfig c;
    c.seed = seed;
    c.typed = true;
    c.max_size = 40;
    if (name == "agreement-untyped" || name == "simulation" || name == "affine") {
        c.typed = false;
        c.loop_prob = name == "affine" ? 0.0 : 0.2;
    } else if (name == "commutation" || name == "subject-reduction") {
        c.loop_prob = 0.1;
    } else if (name == "progress") {
        c.loop_prob = 0.2;
    } else if (name == "termination" || name == "measure") {
        c.allow_void = false;
    }
    return c;
}

Property suite_property(const std::string& name) {
    if (name == "agreement" || name == "agreement-untyped") return agreement;
    if (name == "simulation") return simulation;
    if (name == "commutation") return commutation;
    if (name == "affine") return affine_termination;
    if (name == "confluence") return confluence;
    if (name == "diamond") return diamond;
    if (name == "subject-reduction") return subject_reduction;
    if (name == "progress") return progress;
    if (name == "termination") return termination;
    if (name == "measure") return measure;
    throw std::invalid_argument("unknown suite " + name);
}

namespace {

void subterms(const Term& t, RedexPath& path, std::vector<std::pair<RedexPath, Term>>& out) {
    out.emplace_back(path, t);
    for (int i = 0; i < arity(t); ++i) {
        path.push_back(i);
        subterms(child(t, i), path, out);
        path.pop_back();
    }
}

PropResult replay(const Property& p, const Term& t, std::uint64_t seed) {
    Rng rng = item_rng(seed, 0);
    try {
        return p(t, rng);
    } catch (const TermTooLarge& e) {
        return discard(e.what());
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

}  // namespace

Term shrink(const Term& t, const Property& p, std::uint64_t seed) {
    Term cur = t;
    for (int round = 0; round < 200; ++round) {
        std::vector<std::pair<RedexPath, Term>> subs;
        RedexPath path;
        subterms(cur, path, subs);
        std::vector<Term> cands;
        for (const auto& [pth, s] : subs)
            if (!pth.empty() && free_vars(s).empty()) cands.push_back(s);
        for (const auto& [pth, s] : subs)
            if (!pth.empty() && size(s) > 1) cands.push_back(replace_at(cur, pth, star()));
        std::stable_sort(cands.begin(), cands.end(), [](const Term& a, const Term& b) { return size(a) < size(b); });
        bool improved = false;
        for (const auto& c : cands) {
            if (size(c) >= size(cur)) continue;
            if (replay(p, c, seed).outcome == Outcome::Fail) {
                cur = c;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    return cur;
}

SuiteReport run_suite(const std::string& name, std::size_t n, const GenConfig& cfg) {
    validate(cfg);
    SuiteReport rep;
    rep.name = name;
    rep.n = n;
    const std::size_t cap = 20 * n + 20;
    if (name == "inhabitation") {
        for (std::size_t k = 0; k < n; ++k) {
            Rng rng = item_rng(cfg.seed, k);
            ValueType t = gen_type(cfg, rng, cfg.type_depth);
            PropResult r = inhabitation_property(t);
            if (r.outcome == Outcome::Pass) {
                ++rep.passed;
            } else {
                ++rep.failed;
                if (!rep.counterexample) {
                    rep.counterexample = print_type(t);
                    rep.detail = r.detail;
                }
            }
        }
        return rep;
    }
    Property p = suite_property(name);
    for (std::size_t k = 0; rep.passed + rep.failed < n && k < cap; ++k) {
        Rng rng = item_rng(cfg.seed, k);
        Term t = gen_term(cfg, rng);
        std::uint64_t pseed = cfg.seed * 1000003u + k;
        PropResult r = replay(p, t, pseed);
        switch (r.outcome) {
            case Outcome::Pass: ++rep.passed; break;
            case Outcome::Discard: ++rep.discarded; break;
            case Outcome::Fail:
                ++rep.failed;
                if (!rep.counterexample) {
                    Term small = shrink(t, p, pseed);
                    rep.counterexample = print(small);
                    rep.detail = replay(p, small, pseed).detail;
                }
                break;
        }
    }
    return rep;
}

std::string report_text(const SuiteReport& r) {
    std::ostringstream os;
    os << r.name << ": " << r.passed << " passed, " << r.failed << " failed, " << r.discarded << " discarded";
    if (r.counterexample) os << "\n  counterexample: " << *r.counterexample << "\n  " << r.detail;
    return os.str();
}

std::string report_json(const std::vector<SuiteReport>& rs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rs) {
        nlohmann::json j = {{"suite", r.name},     {"n", r.n},
                            {"passed", r.passed}, {"failed", r.failed},
                            {"discarded", r.discarded}};
        if (r.counterexample) {
            j["counterexample"] = *r.counterexample;
            j["detail"] = r.detail;
        }
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace fmc
