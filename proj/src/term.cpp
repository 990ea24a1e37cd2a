#include <cassert>
#include <cctype>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (!(std::isalnum(c) || c == '_' || c == '\'')) return false;
    }
    return true;
}

std::string to_string(const ChoiceLabel& c) { return c.is_star() ? "*" : "'" + c.name; }
std::string to_string(const Location& l) { return l.name; }
std::string display(const Location& l) { return l.is_default() ? "λ" : l.name; }

const StackType& MemType::get(const Location& l) const {
    static const StackType none;
    auto it = at.find(l);
    return it == at.end() ? none : it->second;
}

void MemType::set(const Location& l, StackType s) {
    if (s.empty())
        at.erase(l);
    else
        at[l] = std::move(s);
}

ValueType choice_type(const ChoiceLabel& i) {
    ValueType t;
    t.out.branch[i] = MemType{};
    return t;
}

MemType singleton(const Location& a, StackType s) {
    MemType m;
    m.set(a, std::move(s));
    return m;
}

namespace {
Term mk(Node n) { return std::make_shared<const Node>(std::move(n)); }
}  // namespace

Term var(Identifier x, SrcPos p) {
    Node n;
    n.kind = Kind::Var;
    n.name = std::move(x);
    n.pos = p;
    return mk(std::move(n));
}

Term push(Term arg, Location loc, Term cont, SrcPos p) {
    Node n;
    n.kind = Kind::Push;
    n.a = std::move(arg);
    n.loc = std::move(loc);
    n.b = std::move(cont);
    n.pos = p;
    return mk(std::move(n));
}

Term pop(Location loc, Identifier x, Term cont, TypePtr annot, SrcPos p) {
    Node n;
    n.kind = Kind::Pop;
    n.loc = std::move(loc);
    n.name = std::move(x);
    n.annot = std::move(annot);
    n.b = std::move(cont);
    n.pos = p;
    return mk(std::move(n));
}

Term choice(ChoiceLabel i, SrcPos p) {
    Node n;
    n.kind = Kind::Choice;
    n.label = std::move(i);
    n.pos = p;
    return mk(std::move(n));
}

Term kase(Term body, ChoiceLabel i, Term handler, SrcPos p) {
    Node n;
    n.kind = Kind::Case;
    n.a = std::move(body);
    n.label = std::move(i);
    n.b = std::move(handler);
    n.pos = p;
    return mk(std::move(n));
}

Term loop(Term body, ChoiceLabel i, SrcPos p) {
    Node n;
    n.kind = Kind::Loop;
    n.a = std::move(body);
    n.label = std::move(i);
    n.pos = p;
    return mk(std::move(n));
}

int arity(const Term& t) {
    switch (t->kind) {
        case Kind::Var:
        case Kind::Choice: return 0;
        case Kind::Pop:
        case Kind::Loop: return 1;
        case Kind::Push:
        case Kind::Case: return 2;
    }
    return 0;
}

const Term& child(const Term& t, int i) {
    assert(i >= 0 && i < arity(t));
    if (t->kind == Kind::Pop) return t->b;
    return i == 0 ? t->a : t->b;
}

Term with_child(const Term& t, int i, Term c) {
    Node n = *t;
    if (t->kind == Kind::Pop)
        n.b = std::move(c);
    else if (i == 0)
        n.a = std::move(c);
    else
        n.b = std::move(c);
    return mk(std::move(n));
}

std::size_t size(const Term& t) {
    std::size_t s = 1;
    for (int i = 0; i < arity(t); ++i) s += size(child(t, i));
    return s;
}

std::size_t size_capped(const Term& t, std::size_t cap) {
    std::size_t n = 0;
    std::vector<const Node*> todo{t.get()};
    while (!todo.empty() && n < cap) {
        const Node* u = todo.back();
        todo.pop_back();
        ++n;
        if (u->a) todo.push_back(u->a.get());
        if (u->b) todo.push_back(u->b.get());
    }
    return n;
}

bool loop_free(const Term& t) {
    if (t->kind == Kind::Loop) return false;
    for (int i = 0; i < arity(t); ++i)
        if (!loop_free(child(t, i))) return false;
    return true;
}

void collect_names(const Term& t, std::set<Identifier>& out) {
    if (t->kind == Kind::Var || t->kind == Kind::Pop) out.insert(t->name);
    for (int i = 0; i < arity(t); ++i) collect_names(child(t, i), out);
}

namespace {

std::string strip_suffix(const std::string& s) {
    auto q = s.rfind('\'');
    if (q == std::string::npos || q == 0 || q + 1 == s.size()) return s;
    for (auto k = q + 1; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return s;
    return s.substr(0, q);
}
}  // namespace

Identifier fresh_name(const Identifier& base, const std::set<Identifier>& avoid) {
    std::map<std::string, unsigned long> hints;
    return fresh_name(base, avoid, hints);
}

Identifier fresh_name(const Identifier& base, const std::set<Identifier>& avoid,
                      std::map<std::string, unsigned long>& hints) {
    std::string stem = base == "_" ? "v" : strip_suffix(base);
    auto& k = hints.try_emplace(stem, 1).first->second;
    for (;; ++k) {
        std::string cand = stem + "'" + std::to_string(k);
        if (!avoid.count(cand)) return cand;
    }
}

ParseError::ParseError(const std::string& msg, int l, int c)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), col(c) {}

}  // namespace fmc
