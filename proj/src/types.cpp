#include <algorithm>
#include <set>

#include "fmc/types.hpp"

namespace fmc {

TypeError::TypeError(const std::string& msg, SrcPos p)
    : std::runtime_error(p.line ? std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg : msg), pos(p) {}

MemType expand(const MemType& m, const MemType& s) {
    MemType r = m;
    for (const auto& [loc, bottom] : s.at) {
        StackType st = bottom;
        const auto& top = m.get(loc);
        st.insert(st.end(), top.begin(), top.end());
        r.set(loc, std::move(st));
    }
    return r;
}

ValueType expand(const ValueType& t, const MemType& s) {
    if (s.empty()) return t;
    ValueType r;
    r.in = expand(t.in, s);
    for (const auto& [c, m] : t.out.branch) r.out.branch[c] = expand(m, s);
    return r;
}

ValueType include(const ValueType& t, const SumType& extra) {
    ValueType r = t;
    for (const auto& [c, m] : extra.branch) {
        if (r.out.has(c)) throw TypeError("inclusion overlaps on choice " + to_string(c));
        r.out.branch[c] = m;
    }
    return r;
}

namespace {

std::set<Location> locations_of(const MemType& a, const MemType& b) {
    std::set<Location> out;
    for (const auto& e : a.at) out.insert(e.first);
    for (const auto& e : b.at) out.insert(e.first);
    return out;
}

// Splits `longer` into (bottom, top) where top has the length of `shorter`.
bool top_suffix_equal(const StackType& shorter, const StackType& longer) {
    if (shorter.size() > longer.size()) return false;
    auto off = longer.size() - shorter.size();
    for (std::size_t k = 0; k < shorter.size(); ++k)
        if (!(shorter[k] == longer[off + k])) return false;
    return true;
}

std::optional<ValueType> slot_join(const ValueType& a, const ValueType& b) {
    if (a == b) return a;
    return join(a, b);
}

enum class Rel { Flow, Merge, Exact };

struct Pair {
    const MemType* a;
    const MemType* b;
    Rel rel;
};

struct Aligned {
    MemType da;
    MemType db;
    std::vector<MemType> merged;  // one per pair, meaningful for Merge
};

// Finds bottom expansions da, db such that da.a and db.b line up slot for slot
// in every pair. All pairs at a location must agree on the depth difference.
std::optional<Aligned> align(const std::vector<Pair>& pairs) {
    Aligned out;
    std::set<Location> locs;
    for (const auto& p : pairs)
        for (const auto& l : locations_of(*p.a, *p.b)) locs.insert(l);
    for (const auto& loc : locs) {
        std::optional<long> delta;
        for (const auto& p : pairs) {
            long d = static_cast<long>(p.b->get(loc).size()) - static_cast<long>(p.a->get(loc).size());
            if (delta && *delta != d) return std::nullopt;
            delta = d;
        }
        if (!delta || *delta == 0) continue;
        const auto& p0 = pairs.front();
        if (*delta > 0) {
            const auto& b = p0.b->get(loc);
            out.da.set(loc, StackType(b.begin(), b.begin() + *delta));
        } else {
            const auto& a = p0.a->get(loc);
            out.db.set(loc, StackType(a.begin(), a.begin() + (-*delta)));
        }
    }
    for (const auto& p : pairs) {
        MemType a = expand(*p.a, out.da), b = expand(*p.b, out.db);
        MemType m;
        for (const auto& loc : locations_of(a, b)) {
            const auto& sa = a.get(loc);
            const auto& sb = b.get(loc);
            if (sa.size() != sb.size()) return std::nullopt;
            StackType sm;
            for (std::size_t k = 0; k < sa.size(); ++k) {
                switch (p.rel) {
                    case Rel::Flow:
                        if (!subsume(sa[k], sb[k])) return std::nullopt;
                        break;
                    case Rel::Exact:
                        if (!(sa[k] == sb[k])) return std::nullopt;
                        break;
                    case Rel::Merge: {
                        auto j = slot_join(sa[k], sb[k]);
                        if (!j) return std::nullopt;
                        sm.push_back(std::move(*j));
                        break;
                    }
                }
            }
            m.set(loc, std::move(sm));
        }
        out.merged.push_back(std::move(m));
    }
    return out;
}

// Input stacks: the shorter must be the top of the longer, slot for slot.
bool input_expansions(const MemType& a, const MemType& b, MemType& ea, MemType& eb) {
    for (const auto& loc : locations_of(a, b)) {
        const auto& sa = a.get(loc);
        const auto& sb = b.get(loc);
        if (sa.size() <= sb.size()) {
            if (!top_suffix_equal(sa, sb)) return false;
            ea.set(loc, StackType(sb.begin(), sb.begin() + (sb.size() - sa.size())));
        } else {
            if (!top_suffix_equal(sb, sa)) return false;
            eb.set(loc, StackType(sa.begin(), sa.begin() + (sa.size() - sb.size())));
        }
    }
    return true;
}

}  // namespace

std::optional<Expansions> match_types(const ValueType& t1, const ValueType& t2) {
    std::vector<Pair> pairs{{&t1.in, &t2.in, Rel::Exact}};
    for (const auto& [c, m] : t1.out.branch) {
        auto it = t2.out.branch.find(c);
        if (it != t2.out.branch.end()) pairs.push_back({&m, &it->second, Rel::Exact});
    }
    auto al = align(pairs);
    if (!al) return std::nullopt;
    return Expansions{al->da, al->db};
}

bool subsume(const ValueType& syn, const ValueType& goal) {
    MemType s, extra_goal;
    if (!input_expansions(syn.in, goal.in, s, extra_goal)) return false;
    if (!extra_goal.empty()) return false;  // goal input shallower than syn
    for (const auto& [c, m] : syn.out.branch) {
        auto it = goal.out.branch.find(c);
        if (it == goal.out.branch.end()) return false;
        const MemType x = expand(m, s);
        const MemType& y = it->second;
        for (const auto& loc : locations_of(x, y)) {
            const auto& sx = x.get(loc);
            const auto& sy = y.get(loc);
            if (sx.size() != sy.size()) return false;
            // Carried slots included: joins widen stored values on outputs.
            for (std::size_t k = 0; k < sx.size(); ++k)
                if (!subsume(sx[k], sy[k])) return false;
        }
    }
    return true;
}

std::optional<ValueType> join(const ValueType& s, const ValueType& t) {
    MemType es, et;
    if (!input_expansions(s.in, t.in, es, et)) return std::nullopt;
    ValueType r;
    r.in = expand(s.in, es);
    ValueType s2 = expand(s, es), t2 = expand(t, et);
    for (const auto& [c, m] : s2.out.branch) {
        auto it = t2.out.branch.find(c);
        if (it == t2.out.branch.end()) {
            r.out.branch[c] = m;
            continue;
        }
        auto al = align({{&m, &it->second, Rel::Merge}});
        if (!al || !al->da.empty() || !al->db.empty()) return std::nullopt;
        r.out.branch[c] = al->merged.front();
    }
    for (const auto& [c, m] : t2.out.branch)
        if (!r.out.has(c)) r.out.branch[c] = m;
    return r;
}

namespace {

bool chk(Context& g, const Term& t, const ValueType& goal);

// Runs f with x bound to t, restoring any outer binding afterwards.
template <class F>
auto with_binding(Context& g, const Identifier& x, const ValueType& t, F&& f) {
    if (x == "_") return f();
    auto saved = g.find(x) != g.end() ? std::optional<ValueType>(g[x]) : std::nullopt;
    g[x] = t;
    struct Restore {
        Context& g;
        const Identifier& x;
        std::optional<ValueType>& saved;
        ~Restore() {
            if (saved)
                g[x] = *saved;
            else
                g.erase(x);
        }
    } restore{g, x, saved};
    return f();
}

ValueType syn(Context& g, const Term& t) {
    switch (t->kind) {
        case Kind::Var: {
            auto it = g.find(t->name);
            if (it == g.end()) throw TypeError("unbound variable " + t->name, t->pos);
            return it->second;
        }
        case Kind::Choice: return choice_type(t->label);
        case Kind::Pop: {
            if (!t->annot) throw TypeError("binder " + t->name + " needs a type annotation", t->pos);
            ValueType body = with_binding(g, t->name, *t->annot, [&] { return syn(g, t->b); });
            StackType st = body.in.get(t->loc);
            st.push_back(*t->annot);
            body.in.set(t->loc, std::move(st));
            return body;
        }
        case Kind::Push: {
            ValueType body = syn(g, t->b);
            StackType st = body.in.get(t->loc);
            if (st.empty()) {
                ValueType arg = syn(g, t->a);
                ValueType r = expand(body, singleton(t->loc, {arg}));
                r.in.set(t->loc, {});
                return r;
            }
            if (!chk(g, t->a, st.back())) {
                ValueType arg = syn(g, t->a);
                throw TypeError("pushed argument of type " + print_type(arg) + " does not fit expected " +
                                    print_type(st.back()),
                                t->pos);
            }
            st.pop_back();
            body.in.set(t->loc, std::move(st));
            return body;
        }
        case Kind::Case: {
            ValueType m = syn(g, t->a);
            ValueType n = syn(g, t->b);
            const ChoiceLabel& i = t->label;
            std::vector<Pair> pairs;
            std::vector<ChoiceLabel> merged;
            auto compose = [&]() -> std::optional<Aligned> {
                pairs.clear();
                merged.clear();
                if (m.out.has(i)) pairs.push_back({&m.out.branch.at(i), &n.in, Rel::Flow});
                for (const auto& [c, mm] : m.out.branch) {
                    if (c == i) continue;
                    auto it = n.out.branch.find(c);
                    if (it != n.out.branch.end()) {
                        pairs.push_back({&mm, &it->second, Rel::Merge});
                        merged.push_back(c);
                    }
                }
                if (pairs.empty()) return Aligned{};
                return align(pairs);
            };
            auto al0 = compose();
            if (!al0 && m.out.has(i)) {
                // The body's i-branch may be unreachable, so that it can
                // equally return exactly what the handler expects.
                ValueType m2 = m;
                m2.out.branch[i] = n.in;
                if (chk(g, t->a, m2)) {
                    m = std::move(m2);
                    al0 = compose();
                }
            }
            if (!al0)
                throw TypeError("case on " + to_string(i) + ": cannot compose " + print_type(m) + " with " +
                                    print_type(n),
                                t->pos);
            Aligned al = std::move(*al0);
            ValueType out;
            out.in = expand(m.in, al.da);
            std::size_t first_merge = m.out.has(i) ? 1 : 0;
            for (const auto& [c, nn] : n.out.branch) out.out.branch[c] = expand(nn, al.db);
            for (std::size_t k = 0; k < merged.size(); ++k) out.out.branch[merged[k]] = al.merged[first_merge + k];
            for (const auto& [c, mm] : m.out.branch)
                if (c != i && !out.out.has(c)) out.out.branch[c] = expand(mm, al.da);
            return out;
        }
        case Kind::Loop: {
            ValueType m = syn(g, t->a);
            auto it = m.out.branch.find(t->label);
            if (it == m.out.branch.end()) return m;
            auto al = align({{&it->second, &m.in, Rel::Flow}});
            if (!al || !al->da.empty() || !al->db.empty()) {
                // The looped branch may be unreachable and only mismatch
                // under the expansion synthesis chose.
                ValueType goal = m;
                goal.out.branch[t->label] = m.in;
                if (chk(g, t->a, goal)) {
                    m.out.branch.erase(t->label);
                    return m;
                }
                throw TypeError("loop on " + to_string(t->label) + ": branch " + print_memtype(it->second) +
                                    " does not match input " + print_memtype(m.in),
                                t->pos);
            }
            m.out.branch.erase(it);
            return m;
        }
    }
    throw TypeError("unreachable");
}

std::optional<ValueType> try_syn(Context& g, const Term& t) {
    try {
        return syn(g, t);
    } catch (const TypeError&) {
        return std::nullopt;
    }
}

// Inputs t would need, read off the synthesizable subterms on its spine (case
// bodies and handlers, push and pop continuations), outermost first.
void spine_inputs(Context& g, const Term& t, std::vector<MemType>& out, int depth = 0) {
    if (depth > 8 || out.size() >= 8) return;
    auto add = [&](const MemType& m) {
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    };
    if (auto s = try_syn(g, t)) {
        add(s->in);
        return;
    }
    std::vector<MemType> inner;
    switch (t->kind) {
        case Kind::Case:
            spine_inputs(g, t->a, out, depth + 1);
            spine_inputs(g, t->b, out, depth + 1);
            break;
        case Kind::Push:
            spine_inputs(g, t->b, inner, depth + 1);
            for (auto& m : inner) {
                StackType st = m.get(t->loc);
                if (!st.empty()) st.pop_back();
                m.set(t->loc, std::move(st));
                add(m);
            }
            break;
        case Kind::Pop:
            if (!t->annot) break;
            with_binding(g, t->name, *t->annot, [&] { spine_inputs(g, t->b, inner, depth + 1); return 0; });
            for (auto& m : inner) {
                StackType st = m.get(t->loc);
                st.push_back(*t->annot);
                m.set(t->loc, std::move(st));
                add(m);
            }
            break;
        default: break;
    }
}

// Goal-directed checking. Synthesis fixes one expansion for the whole term;
// here each subterm gets the expansion the goal asks of it, which matters for
// branches that the input cannot reach (a case on a choice its body never
// returns).
bool chk(Context& g, const Term& t, const ValueType& goal) {
    auto s = try_syn(g, t);
    if (s && subsume(*s, goal)) return true;
    switch (t->kind) {
        case Kind::Var:
        case Kind::Choice: return false;
        case Kind::Pop: {
            if (!t->annot) return false;
            StackType st = goal.in.get(t->loc);
            if (st.empty() || !(st.back() == *t->annot)) return false;
            st.pop_back();
            ValueType inner = goal;
            inner.in.set(t->loc, std::move(st));
            return with_binding(g, t->name, *t->annot, [&] { return chk(g, t->b, inner); });
        }
        case Kind::Push: {
            // Candidate slot types: what the body pops, its join with what the
            // argument synthesizes, the latter alone, and what the goal leaves on the location when the
            // body passes the pushed value through.
            std::vector<ValueType> slots;
            if (auto mt = try_syn(g, t->b); mt && !mt->in.get(t->loc).empty()) slots.push_back(mt->in.get(t->loc).back());
            if (auto at = try_syn(g, t->a)) {
                if (!slots.empty())
                    if (auto j = join(*at, slots.front())) slots.push_back(*j);
                slots.push_back(*at);
            }
            for (const auto& [c, m] : goal.out.branch)
                for (const auto& v : m.get(t->loc)) slots.push_back(v);
            for (std::size_t k = 0; k < slots.size(); ++k) {
                const ValueType& slot = slots[k];
                if (std::find(slots.begin(), slots.begin() + k, slot) != slots.begin() + k) continue;
                if (!chk(g, t->a, slot)) continue;
                ValueType inner = goal;
                StackType st = goal.in.get(t->loc);
                st.push_back(slot);
                inner.in.set(t->loc, std::move(st));
                if (chk(g, t->b, inner)) return true;
            }
            return false;
        }
        case Kind::Case: {
            auto m = try_syn(g, t->a);
            auto n = try_syn(g, t->b);
            const ChoiceLabel& i = t->label;
            MemType e, extra;
            // A body whose synthesized input does not fit may still check.
            if (m && (!input_expansions(m->in, goal.in, e, extra) || !extra.empty())) m.reset();
            // Candidate handler inputs: what the body returns on i, and what the
            // goal branches ask of the handler. These matter when the
            // body's i-branch is itself unreachable.
            std::vector<MemType> inputs;
            if (m && m->out.has(i)) inputs.push_back(expand(m->out.branch.at(i), e));
            if (n) for (const auto& [c, nm] : n->out.branch) {
                auto it = goal.out.branch.find(c);
                if (it == goal.out.branch.end()) continue;
                MemType en;
                bool fits = true;
                for (const auto& loc : locations_of(nm, it->second)) {
                    const auto& have = nm.get(loc);
                    const auto& want = it->second.get(loc);
                    if (want.size() < have.size()) {
                        fits = false;
                        break;
                    }
                    en.set(loc, StackType(want.begin(), want.begin() + (want.size() - have.size())));
                }
                if (MemType r = expand(n->in, en); fits && std::find(inputs.begin(), inputs.end(), r) == inputs.end())
                    inputs.push_back(r);
            }
            if (n && std::find(inputs.begin(), inputs.end(), n->in) == inputs.end()) inputs.push_back(n->in);
            // A handler the body never reaches may take any input; try the
            // goal's, what the body leaves on its other branches, and when the
            // handler does not synthesize, what its parts ask for.
            if (std::find(inputs.begin(), inputs.end(), goal.in) == inputs.end()) inputs.push_back(goal.in);
            if (m)
                for (const auto& [c, mm] : m->out.branch)
                    if (MemType r = expand(mm, e); std::find(inputs.begin(), inputs.end(), r) == inputs.end())
                        inputs.push_back(std::move(r));
            if (!n) {
                std::vector<MemType> more;
                spine_inputs(g, t->b, more);
                for (const auto& r : more)
                    for (MemType c : {r, expand(r, goal.in)})
                        if (std::find(inputs.begin(), inputs.end(), c) == inputs.end()) inputs.push_back(std::move(c));
            }
            for (const auto& r : inputs) {
                if (!chk(g, t->b, ValueType{r, goal.out})) continue;
                ValueType gm = goal;
                gm.out.branch[i] = r;
                if (chk(g, t->a, gm)) return true;
            }
            return false;
        }
        case Kind::Loop: {
            ValueType gm = goal;
            gm.out.branch[t->label] = goal.in;
            return chk(g, t->a, gm);
        }
    }
    return false;
}

}  // namespace

ValueType synthesize(const Context& g, const Term& t) {
    Context ctx = g;
    return syn(ctx, t);
}

void check(const Context& g, const Term& t, const ValueType& goal) {
    Context ctx = g;
    if (chk(ctx, t, goal)) return;
    auto s = synthesize(g, t);
    throw TypeError("term of type " + print_type(s) + " does not check against " + print_type(goal), t->pos);
}

ValueType type_state(const State& st, const MemType* hyp) {
    ValueType tm = synthesize({}, st.term);
    MemType below;
    for (const auto& [loc, items] : st.mem.stacks) {
        std::vector<ValueType> have;
        if (hyp) {
            const auto& h = hyp->get(loc);
            if (h.size() != items.size()) throw TypeError("memory hypothesis depth mismatch at " + display(loc));
            for (std::size_t k = 0; k < items.size(); ++k)
                if (!subsume(synthesize({}, items[k]), h[k]))
                    throw TypeError("memory entry does not fit hypothesis at " + display(loc));
            have = h;
        } else {
            for (const auto& it : items) have.push_back(synthesize({}, it));
        }
        const auto& need = tm.in.get(loc);
        if (need.size() > have.size()) throw TypeError("memory too shallow at " + display(loc));
        auto off = have.size() - need.size();
        for (std::size_t k = 0; k < need.size(); ++k)
            if (!subsume(have[off + k], need[k])) throw TypeError("memory entry mistyped at " + display(loc));
        below.set(loc, StackType(have.begin(), have.begin() + off));
    }
    for (const auto& [loc, need] : tm.in.at)
        if (!st.mem.stacks.count(loc)) throw TypeError("memory empty at " + display(loc));
    SumType cur = expand(tm, below).out;
    for (auto f = st.cont.rbegin(); f != st.cont.rend(); ++f) {
        ValueType h = synthesize({}, f->term);
        auto it = cur.branch.find(f->label);
        if (it == cur.branch.end()) continue;
        std::vector<Pair> pairs{{&it->second, &h.in, Rel::Flow}};
        std::vector<ChoiceLabel> merged;
        for (const auto& [c, m] : cur.branch) {
            if (c == f->label) continue;
            auto jt = h.out.branch.find(c);
            if (jt != h.out.branch.end()) {
                pairs.push_back({&m, &jt->second, Rel::Merge});
                merged.push_back(c);
            }
        }
        auto al = align(pairs);
        if (!al || !al->da.empty()) throw TypeError("continuation " + to_string(f->label) + " does not fit");
        SumType next;
        for (const auto& [c, m] : h.out.branch) next.branch[c] = expand(m, al->db);
        for (std::size_t k = 0; k < merged.size(); ++k) next.branch[merged[k]] = al->merged[1 + k];
        for (const auto& [c, m] : cur.branch)
            if (c != f->label && !next.has(c)) next.branch[c] = m;
        cur = std::move(next);
    }
    ValueType r;
    r.out = std::move(cur);
    return r;
}

Term inhabit(const ValueType& t) {
    if (t.out.empty()) {
        ValueType t2;
        t2.in = t.in;
        t2.out.branch[ChoiceLabel::star()] = t.in;
        return loop(inhabit(t2), ChoiceLabel::star());
    }
    const auto& [i, outm] = *t.out.branch.begin();
    Term r = choice(i);
    for (auto loc = outm.at.rbegin(); loc != outm.at.rend(); ++loc)
        for (auto it = loc->second.rbegin(); it != loc->second.rend(); ++it) r = push(inhabit(*it), loc->first, r);
    for (auto loc = t.in.at.rbegin(); loc != t.in.at.rend(); ++loc)
        for (const auto& slot : loc->second)
            r = pop(loc->first, "_", r, std::make_shared<const ValueType>(slot));
    return r;
}

Memory zero_memory(const MemType& m) {
    Memory mem;
    for (const auto& [loc, st] : m.at)
        for (const auto& slot : st) mem.push(loc, inhabit(slot));
    return mem;
}

ChoiceLabel int_label(unsigned k) { return ChoiceLabel("n" + std::to_string(k)); }
ChoiceLabel true_label() { return ChoiceLabel("true"); }
ChoiceLabel false_label() { return ChoiceLabel("false"); }

ValueType int_type(unsigned modulus) {
    ValueType t;
    for (unsigned k = 0; k < modulus; ++k) t.out.branch[int_label(k)] = MemType{};
    return t;
}

ValueType bool_type() {
    ValueType t;
    t.out.branch[false_label()] = MemType{};
    t.out.branch[true_label()] = MemType{};
    return t;
}

TypeNames standard_names(unsigned modulus) { return {{"B", bool_type()}, {"Z", int_type(modulus)}}; }

}  // namespace fmc
