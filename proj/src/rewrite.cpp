#include <algorithm>
#include <map>
#include <sstream>

#include "fmc/rewrite.hpp"
#include "json.hpp"

namespace fmc {

const char* rule_name(RRule r) {
    switch (r) {
        case RRule::Beta: return "beta";
        case RRule::Passage: return "passage";
        case RRule::Select: return "select";
        case RRule::Reject: return "reject";
        case RRule::PrefixPop: return "prefix-pop";
        case RRule::PrefixPush: return "prefix-push";
        case RRule::Associate: return "associate";
        case RRule::Unroll: return "unroll";
    }
    return "?";
}

std::optional<RRule> redex_at(const Term& t) {
    switch (t->kind) {
        case Kind::Push: {
            const Term& m = t->b;
            if (m->kind != Kind::Pop) return std::nullopt;
            if (m->loc == t->loc) return RRule::Beta;
            if (!occurs_free(m->name, t->a)) return RRule::Passage;
            return std::nullopt;
        }
        case Kind::Case: {
            const Term& body = t->a;
            switch (body->kind) {
                case Kind::Choice: return body->label == t->label ? RRule::Select : RRule::Reject;
                case Kind::Pop:
                    if (!occurs_free(body->name, t->b)) return RRule::PrefixPop;
                    return std::nullopt;
                case Kind::Push: return RRule::PrefixPush;
                case Kind::Case:
                    if (body->label == t->label) return RRule::Associate;
                    return std::nullopt;
                default: return std::nullopt;
            }
        }
        case Kind::Loop: return RRule::Unroll;
        default: return std::nullopt;
    }
}

namespace {

void collect(const Term& t, RedexPath& path, bool unroll, std::vector<Redex>& out) {
    if (auto r = redex_at(t); r && (unroll || *r != RRule::Unroll)) out.push_back({path, *r});
    for (int i = 0; i < arity(t); ++i) {
        path.push_back(i);
        collect(child(t, i), path, unroll, out);
        path.pop_back();
    }
}

}  // namespace

std::vector<Redex> redexes(const Term& t, bool include_unroll) {
    std::vector<Redex> out;
    RedexPath path;
    collect(t, path, include_unroll, out);
    return out;
}

const Term& subterm(const Term& t, const RedexPath& p) {
    const Term* cur = &t;
    for (int i : p) {
        if (i < 0 || i >= arity(*cur)) throw RewriteError("invalid redex path " + path_string(p));
        cur = &child(*cur, i);
    }
    return *cur;
}

Term replace_at(const Term& t, const RedexPath& p, const Term& u) {
    // Rebuild the spine iteratively; deep paths must not recurse.
    std::vector<const Term*> spine{&t};
    for (int i : p) {
        if (i < 0 || i >= arity(*spine.back())) throw RewriteError("invalid redex path " + path_string(p));
        spine.push_back(&child(*spine.back(), i));
    }
    Term cur = u;
    for (std::size_t k = p.size(); k-- > 0;) cur = with_child(*spine[k], p[k], std::move(cur));
    return cur;
}

namespace {

Term contract_in(const Term& t, RRule r, std::set<Identifier>* context) {
    auto got = redex_at(t);
    if (!got || *got != r) throw RewriteError(std::string("no ") + rule_name(r) + " redex here");
    switch (r) {
        case RRule::Beta: return substitute(t->a, t->b->name, t->b->b, context);
        case RRule::Passage: {
            const Term& m = t->b;
            return pop(m->loc, m->name, push(t->a, t->loc, m->b), m->annot);
        }
        case RRule::Select: return t->b;
        case RRule::Reject: return t->a;
        case RRule::PrefixPop: {
            const Term& n = t->a;
            return pop(n->loc, n->name, kase(n->b, t->label, t->b), n->annot);
        }
        case RRule::PrefixPush: {
            const Term& n = t->a;
            return push(n->a, n->loc, kase(n->b, t->label, t->b));
        }
        case RRule::Associate: {
            const Term& n = t->a;
            return kase(n->a, t->label, kase(n->b, t->label, t->b));
        }
        case RRule::Unroll: return kase(t->a, t->label, t);
    }
    return t;
}

}  // namespace

Term contract(const Term& t, RRule r) { return contract_in(t, r, nullptr); }

Term apply(const Term& t, const RedexPath& p, RRule r) { return replace_at(t, p, contract(subterm(t, p), r)); }

std::optional<Redex> weak_head_redex(const Term& t) {
    RedexPath path;
    const Term* cur = &t;
    for (;;) {
        if (auto r = redex_at(*cur)) return Redex{path, *r};
        int next;
        if ((*cur)->kind == Kind::Push)
            next = 1;
        else if ((*cur)->kind == Kind::Case)
            next = 0;
        else
            return std::nullopt;
        path.push_back(next);
        cur = &child(*cur, next);
    }
}

std::optional<Term> weak_head_step(const Term& t) {
    auto r = weak_head_redex(t);
    if (!r) return std::nullopt;
    return apply(t, r->path, r->rule);
}

Term canonical_pushes(const Term& t) {
    if (t->kind == Kind::Push) {
        std::vector<std::pair<Location, Term>> chain;
        const Term* cur = &t;
        while ((*cur)->kind == Kind::Push) {
            chain.emplace_back((*cur)->loc, canonical_pushes((*cur)->a));
            cur = &(*cur)->b;
        }
        Term rest = canonical_pushes(*cur);
        std::stable_sort(chain.begin(), chain.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (std::size_t k = chain.size(); k-- > 0;) rest = push(chain[k].second, chain[k].first, rest);
        return rest;
    }
    Term out = t;
    for (int i = 0; i < arity(t); ++i) {
        Term c = canonical_pushes(child(t, i));
        if (c != child(t, i)) out = with_child(out, i, c);
    }
    return out;
}

namespace {

// Returns the size of t, accumulating the measure components.
std::size_t measure(const Term& t, std::size_t& n, std::size_t& m) {
    std::size_t s = 1;
    std::size_t first = 0;
    for (int i = 0; i < arity(t); ++i) {
        std::size_t c = measure(child(t, i), n, m);
        if (i == 0) first = c;
        if (t->kind == Kind::Push && i == 1) m += c;
        s += c;
    }
    if (t->kind == Kind::Case) n += first;
    return s;
}

std::optional<Redex> first_affine(const Term& t, RedexPath& path) {
    if (auto r = redex_at(t); r && affine(*r)) return Redex{path, *r};
    for (int i = 0; i < arity(t); ++i) {
        path.push_back(i);
        auto r = first_affine(child(t, i), path);
        path.pop_back();
        if (r) return r;
    }
    return std::nullopt;
}

// Affine normal form of t, assuming every proper subterm is already affine-normal.
Term affine_top(Term t);

Term affine_rec(const Term& t) {
    Term out = t;
    bool changed = false;
    Node n = *t;
    for (int i = 0; i < arity(t); ++i) {
        Term c = affine_rec(child(t, i));
        if (c != child(t, i)) changed = true;
        if (t->kind == Kind::Pop)
            n.b = c;
        else if (i == 0)
            n.a = c;
        else
            n.b = c;
    }
    if (changed) out = std::make_shared<const Node>(std::move(n));
    return affine_top(out);
}

Term affine_top(Term t) {
    auto r = redex_at(t);
    if (!r || !affine(*r)) return t;
    switch (*r) {
        case RRule::Select: return t->b;
        case RRule::Reject: return t->a;
        case RRule::Passage: {
            const Term& m = t->b;
            Term inner = affine_top(push(t->a, t->loc, m->b));
            return pop(m->loc, m->name, inner, m->annot);
        }
        case RRule::PrefixPop: {
            const Term& n = t->a;
            return pop(n->loc, n->name, affine_top(kase(n->b, t->label, t->b)), n->annot);
        }
        case RRule::PrefixPush: {
            const Term& n = t->a;
            return affine_top(push(n->a, n->loc, affine_top(kase(n->b, t->label, t->b))));
        }
        case RRule::Associate: {
            const Term& n = t->a;
            return affine_top(kase(n->a, t->label, affine_top(kase(n->b, t->label, t->b))));
        }
        default: return t;
    }
}

}  // namespace

std::pair<std::size_t, std::size_t> affine_measure(const Term& t) {
    std::size_t n = 0, m = 0;
    measure(t, n, m);
    return {n, m};
}

Term affine_normalize(const Term& t) {
    Term cur = affine_rec(t);
    // The structural pass is exact when every rule output is re-normalized at
    // the root; fall back to plain leftmost contraction to certify the result.
    for (;;) {
        RedexPath path;
        auto r = first_affine(cur, path);
        if (!r) return cur;
        cur = apply(cur, r->path, r->rule);
    }
}

namespace {

std::optional<Redex> first_eligible(const Term& t, RedexPath& path, const UnrollPolicy& pol,
                                    const std::map<const Node*, std::size_t>& count) {
    if (auto r = redex_at(t)) {
        bool ok = true;
        if (*r == RRule::Unroll) {
            if (pol.forbid) {
                ok = false;
            } else {
                auto it = count.find(t.get());
                ok = (it == count.end() ? 0 : it->second) < pol.bound;
            }
        }
        if (ok) return Redex{path, *r};
    }
    for (int i = 0; i < arity(t); ++i) {
        path.push_back(i);
        auto r = first_eligible(child(t, i), path, pol, count);
        path.pop_back();
        if (r) return r;
    }
    return std::nullopt;
}

}  // namespace

NormalizeResult normalize(const Term& t, std::size_t fuel, UnrollPolicy policy, ReductionTrace* trace) {
    NormalizeResult res{t, false, 0};
    std::map<const Node*, std::size_t> count;
    std::vector<Term> keep;  // pins unrolled loop nodes so their addresses stay unique
    for (;;) {
        RedexPath path;
        auto r = first_eligible(res.term, path, policy, count);
        if (!r) return res;
        if (res.steps >= fuel) {
            res.exhausted = true;
            return res;
        }
        if (r->rule == RRule::Unroll) {
            const Term& l = subterm(res.term, r->path);
            ++count[l.get()];
            keep.push_back(l);
        }
        Term next;
        try {
            next = apply(res.term, r->path, r->rule);
        } catch (const TermTooLarge&) {
            res.exhausted = true;
            return res;
        }
        ++res.steps;
        if (trace) trace->push_back({res.steps, r->rule, r->path, res.term, next});
        res.term = std::move(next);
    }
}

namespace {

Term marked(const Term& t, RedexPath& path, const std::set<RedexPath>* marks, std::set<Identifier>& context) {
    bool mark = false;
    if (auto r = redex_at(t); r && duplicating(*r)) mark = !marks || marks->count(path);
    auto sub = [&](int i) {
        path.push_back(i);
        Term c = marked(child(t, i), path, marks, context);
        path.pop_back();
        return c;
    };
    if (mark && t->kind == Kind::Push) {
        Term n = sub(0);
        path.push_back(1);
        path.push_back(0);
        Term m = marked(t->b->b, path, marks, context);
        path.pop_back();
        path.pop_back();
        return substitute(n, t->b->name, m, &context);
    }
    if (mark && t->kind == Kind::Loop) {
        Term m = sub(0);
        return kase(m, t->label, loop(m, t->label, t->pos));
    }
    switch (arity(t)) {
        case 0: return t;
        case 1: {
            Term c = sub(0);
            return c == child(t, 0) ? t : with_child(t, 0, c);
        }
        default: {
            Term c0 = sub(0), c1 = sub(1);
            if (c0 == child(t, 0) && c1 == child(t, 1)) return t;
            return with_child(with_child(t, 0, c0), 1, c1);
        }
    }
}

}  // namespace

Term marked_reduct(const Term& t, const std::set<RedexPath>& marks) {
    for (const auto& p : marks) {
        auto r = redex_at(subterm(t, p));
        if (!r || !duplicating(*r)) throw RewriteError("mark on a non-duplicating position " + path_string(p));
    }
    RedexPath path;
    std::set<Identifier> context;
    collect_names(t, context);
    return marked(t, path, &marks, context);
}

Term complete_development(const Term& t) {
    RedexPath path;
    std::set<Identifier> context;
    collect_names(t, context);
    return marked(t, path, nullptr, context);
}

Term complete_step(const Term& t) { return affine_normalize(complete_development(t)); }

std::string path_string(const RedexPath& p) {
    std::string s = "[";
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(p[k]);
    }
    return s + "]";
}

std::string reduction_text(const ReductionTrace& tr) {
    std::ostringstream os;
    for (const auto& s : tr)
        os << s.n << ". " << rule_name(s.rule) << " at " << path_string(s.path) << "\n   " << print(s.before)
           << "\n-> " << print(s.after) << "\n";
    return os.str();
}

std::string reduction_json(const ReductionTrace& tr) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : tr)
        arr.push_back({{"step", s.n},
                       {"rule", rule_name(s.rule)},
                       {"path", s.path},
                       {"before", print(s.before)},
                       {"after", print(s.after)}});
    return arr.dump(2);
}

}  // namespace fmc
