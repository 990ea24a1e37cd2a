#include <algorithm>
#include <map>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

namespace {

void fv_into(const Term& t, std::vector<Identifier>& bound, std::set<Identifier>& out) {
    switch (t->kind) {
        case Kind::Var:
            if (std::find(bound.begin(), bound.end(), t->name) == bound.end()) out.insert(t->name);
            return;
        case Kind::Pop:
            bound.push_back(t->name);
            fv_into(t->b, bound, out);
            bound.pop_back();
            return;
        default:
            for (int i = 0; i < arity(t); ++i) fv_into(child(t, i), bound, out);
    }
}

struct Subst {
    const Term& n;
    const Identifier& x;
    std::set<Identifier> fv_n;
    std::set<Identifier> avoid;
    bool rename_copies;
    std::size_t n_size = 1;
    std::size_t work = 0;
    std::vector<Identifier> made{};
    std::map<std::string, unsigned long> hints{};

    Identifier fresh(const Identifier& base) {
        auto z = fresh_name(base, avoid, hints);
        avoid.insert(z);
        made.push_back(z);
        return z;
    }

    void charge(std::size_t k) {
        work += k;
        if (work > kMaxTermSize) throw TermTooLarge();
    }

    Term copy_of_n() {
        charge(n_size);
        return rename_copies ? rename_binders(n, {}) : n;
    }

    // Fresh binder names for every Pop inside t, consistently applied.
    Term rename_binders(const Term& t, const std::vector<std::pair<Identifier, Identifier>>& env) {
        switch (t->kind) {
            case Kind::Var: {
                for (auto it = env.rbegin(); it != env.rend(); ++it)
                    if (it->first == t->name) return it->second == t->name ? t : var(it->second, t->pos);
                return t;
            }
            case Kind::Choice: return t;
            case Kind::Pop: {
                if (t->name == "_") {
                    auto c = rename_binders(t->b, env);
                    return c == t->b ? t : with_child(t, 0, c);
                }
                auto env2 = env;
                auto z = fresh(t->name);
                env2.emplace_back(t->name, z);
                return pop(t->loc, z, rename_binders(t->b, env2), t->annot, t->pos);
            }
            default: {
                Term r = t;
                for (int i = 0; i < arity(t); ++i) {
                    auto c = rename_binders(child(t, i), env);
                    if (c != child(t, i)) r = with_child(r, i, c);
                }
                return r;
            }
        }
    }

    Term go(const Term& m) {
        charge(1);
        switch (m->kind) {
            case Kind::Var: return m->name == x ? copy_of_n() : m;
            case Kind::Choice: return m;
            case Kind::Pop: {
                if (m->name == x) return m;
                if (m->name != "_" && fv_n.count(m->name)) {
                    // Rename the binder out of the way of fv(n).
                    auto z = fresh(m->name);
                    Term zt = var(z);
                    Subst r{zt, m->name, {z}, std::move(avoid), false};
                    r.work = work;
                    r.hints = std::move(hints);
                    auto body = r.go(m->b);
                    work = r.work;
                    avoid = std::move(r.avoid);
                    hints = std::move(r.hints);
                    made.insert(made.end(), r.made.begin(), r.made.end());
                    return pop(m->loc, z, go(body), m->annot, m->pos);
                }
                auto c = go(m->b);
                return c == m->b ? m : with_child(m, 0, c);
            }
            default: {
                Term r = m;
                for (int i = 0; i < arity(m); ++i) {
                    auto c = go(child(m, i));
                    if (c != child(m, i)) r = with_child(r, i, c);
                }
                return r;
            }
        }
    }
};

bool alpha(const Term& t, const Term& u, std::vector<Identifier>& bt, std::vector<Identifier>& bu) {
    if (t->kind != u->kind) return false;
    switch (t->kind) {
        case Kind::Var: {
            // Compare binding depth from the innermost binder outwards.
            auto it = std::find(bt.rbegin(), bt.rend(), t->name);
            auto iu = std::find(bu.rbegin(), bu.rend(), u->name);
            bool ft = it == bt.rend(), fu = iu == bu.rend();
            if (ft || fu) return ft && fu && t->name == u->name;
            return (it - bt.rbegin()) == (iu - bu.rbegin());
        }
        case Kind::Choice: return t->label == u->label;
        case Kind::Push: return t->loc == u->loc && alpha(t->a, u->a, bt, bu) && alpha(t->b, u->b, bt, bu);
        case Kind::Pop: {
            if (t->loc != u->loc) return false;
            bt.push_back(t->name);
            bu.push_back(u->name);
            bool r = alpha(t->b, u->b, bt, bu);
            bt.pop_back();
            bu.pop_back();
            return r;
        }
        case Kind::Case: return t->label == u->label && alpha(t->a, u->a, bt, bu) && alpha(t->b, u->b, bt, bu);
        case Kind::Loop: return t->label == u->label && alpha(t->a, u->a, bt, bu);
    }
    return false;
}

}  // namespace

std::set<Identifier> free_vars(const Term& t) {
    std::set<Identifier> out;
    std::vector<Identifier> bound;
    fv_into(t, bound, out);
    return out;
}

bool occurs_free(const Identifier& x, const Term& t) {
    switch (t->kind) {
        case Kind::Var: return t->name == x;
        case Kind::Choice: return false;
        case Kind::Pop: return t->name != x && occurs_free(x, t->b);
        default:
            for (int i = 0; i < arity(t); ++i)
                if (occurs_free(x, child(t, i))) return true;
            return false;
    }
}

Term substitute(const Term& n, const Identifier& x, const Term& m, std::set<Identifier>* context) {
    if (x == "_") return m;
    std::size_t n_size = size_capped(n, kMaxTermSize + 1);
    if (n_size > kMaxTermSize) throw TermTooLarge();
    Subst s{n, x, free_vars(n), {}, true};
    s.n_size = n_size;
    collect_names(n, s.avoid);
    collect_names(m, s.avoid);
    if (context) s.avoid.insert(context->begin(), context->end());
    Term r = s.go(m);
    if (context) context->insert(s.made.begin(), s.made.end());
    return r;
}

bool alpha_eq(const Term& t, const Term& u) {
    if (t == u) return true;
    std::vector<Identifier> bt, bu;
    return alpha(t, u, bt, bu);
}

}  // namespace fmc
