#include <map>
#include <set>

#include "fmc/lexer.hpp"
#include "fmc/surface.hpp"
#include "fmc/types.hpp"

namespace fmc {

DesugarError::DesugarError(const std::string& msg, SrcPos p)
    : std::runtime_error(p.line ? std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg : msg), pos(p) {}

ChoiceLabel break_label() { return ChoiceLabel("Break"); }
ChoiceLabel return_label() { return ChoiceLabel("Return"); }
Location out_loc() { return Location("out"); }
Location in_loc() { return Location("in"); }
Location rnd_loc() { return Location("rnd"); }

namespace {

const std::set<std::string> keywords = {"skip", "var",  "data",  "if",   "then",  "else",   "while", "do",
                                        "try",  "catch", "throw", "break", "return", "case", "of",    "let",
                                        "in",   "print", "read",  "sample", "true",  "false"};

SPtr mk(SNode n) { return std::make_shared<const SNode>(std::move(n)); }

SNode node(SK k, SrcPos p) {
    SNode n;
    n.kind = k;
    n.pos = p;
    return n;
}

class SurfaceParser {
public:
    SurfaceParser(TokenStream& ts, const IntConfig& cfg, SurfaceProgram& prog)
        : ts_(ts), cfg_(cfg), prog_(prog), names_(standard_names(cfg.modulus)) {}

    SPtr program() {
        std::vector<SPtr> items;
        do {
            if (ts_.peek().kind == Tok::End) break;
            if (ts_.is_ident("var")) {
                declaration();
                continue;
            }
            if (ts_.is_ident("data")) {
                data_decl();
                continue;
            }
            items.push_back(stmt());
        } while (ts_.accept(";"));
        if (ts_.peek().kind != Tok::End) ts_.fail("expected ';' or end of program");
        return sequence(std::move(items), {1, 1});
    }

private:
    TokenStream& ts_;
    const IntConfig& cfg_;
    SurfaceProgram& prog_;
    TypeNames names_;

    static SrcPos at(const Token& t) { return {t.line, t.col}; }

    static SPtr sequence(std::vector<SPtr> items, SrcPos p) {
        if (items.empty()) return mk(node(SK::Skip, p));
        SPtr acc = items[0];
        for (std::size_t k = 1; k < items.size(); ++k) {
            SNode n = node(SK::Seq, items[k]->pos);
            n.kids = {acc, items[k]};
            acc = mk(std::move(n));
        }
        return acc;
    }

    bool kw(std::string_view s) {
        if (!ts_.is_ident(s)) return false;
        ts_.next();
        return true;
    }

    void expect_kw(std::string_view s) {
        if (!kw(s)) ts_.fail("expected '" + std::string(s) + "'");
    }

    std::string ident() {
        const auto& t = ts_.peek();
        if (t.kind != Tok::Ident || keywords.count(t.text)) ts_.fail("expected an identifier");
        return ts_.next().text;
    }

    ChoiceLabel label() {
        if (ts_.peek().kind != Tok::Choice) ts_.fail("expected a choice label");
        return ChoiceLabel(ts_.next().text);
    }

    TypePtr vtype() { return std::make_shared<const ValueType>(parse_vtype(ts_, names_)); }

    void declaration() {
        ts_.next();
        Location a(ident());
        ts_.expect(":");
        prog_.cells.emplace_back(a, *vtype());
    }

    void data_decl() {
        ts_.next();
        DataDecl d;
        d.name = ident();
        ts_.expect("=");
        ValueType sum;
        do {
            ChoiceLabel c = label();
            std::vector<ValueType> args;
            if (ts_.accept("(")) {
                do args.push_back(*vtype());
                while (ts_.accept(","));
                ts_.expect(")");
            }
            MemType out;
            out.set(Location(), StackType(args.rbegin(), args.rend()));
            sum.out.branch[c] = std::move(out);
            d.ctors.emplace_back(c, std::move(args));
        } while (ts_.accept("|"));
        names_[d.name] = sum;
        prog_.data.push_back(std::move(d));
    }

    SPtr block(std::string_view close) {
        std::vector<SPtr> items;
        auto p = at(ts_.peek());
        do {
            if (ts_.is_sym(close)) break;
            items.push_back(stmt());
        } while (ts_.accept(";"));
        ts_.expect(close);
        return sequence(std::move(items), p);
    }

    SPtr stmt() {
        const auto& t = ts_.peek();
        auto p = at(t);
        if (kw("skip")) return mk(node(SK::Skip, p));
        if (kw("if")) {
            SNode n = node(SK::If, p);
            auto c = expr();
            expect_kw("then");
            auto a = stmt();
            expect_kw("else");
            n.kids = {c, a, stmt()};
            return mk(std::move(n));
        }
        if (kw("while")) {
            SNode n = node(SK::While, p);
            auto c = expr();
            expect_kw("do");
            n.kids = {c, stmt()};
            return mk(std::move(n));
        }
        if (kw("do")) {
            SNode n = node(SK::DoWhile, p);
            auto body = stmt();
            expect_kw("while");
            n.kids = {body, expr()};
            return mk(std::move(n));
        }
        if (kw("try")) {
            SNode n = node(SK::Try, p);
            auto body = stmt();
            expect_kw("catch");
            n.label = label();
            n.kids = {body, stmt()};
            return mk(std::move(n));
        }
        if (kw("throw")) {
            SNode n = node(SK::Throw, p);
            n.label = label();
            return mk(std::move(n));
        }
        if (kw("break")) return mk(node(SK::Break, p));
        if (kw("return")) {
            SNode n = node(SK::Return, p);
            n.kids = {expr()};
            return mk(std::move(n));
        }
        if (kw("print")) {
            SNode n = node(SK::Print, p);
            n.kids = {expr()};
            return mk(std::move(n));
        }
        if (t.kind == Tok::Ident && !keywords.count(t.text) && ts_.is_sym(":=", 1)) {
            SNode n = node(SK::Assign, p);
            n.name = ts_.next().text;
            ts_.next();
            n.kids = {expr()};
            return mk(std::move(n));
        }
        return expr();
    }

    SPtr expr() {
        auto p = at(ts_.peek());
        if (kw("let")) {
            SNode n = node(SK::LetV, p);
            n.name = ident();
            ts_.expect("=");
            auto bound = expr();
            expect_kw("in");
            n.kids = {bound, expr()};
            return mk(std::move(n));
        }
        if (ts_.accept("\\")) {
            SNode n = node(SK::LamV, p);
            n.name = ident();
            if (ts_.accept(":")) n.type = vtype();
            ts_.expect(".");
            n.kids = {expr()};
            return mk(std::move(n));
        }
        if (kw("case")) return case_of(p);
        return comparison();
    }

    SPtr case_of(SrcPos p) {
        auto scrut = expr();
        expect_kw("of");
        ts_.expect("{");
        std::vector<SBranch> bs;
        bool cbn = false;
        do {
            SBranch b;
            const auto& t = ts_.peek();
            bool is_ctor = t.kind == Tok::Choice;
            if (!bs.empty() && is_ctor != cbn) ts_.fail("constructor and constant patterns cannot be mixed");
            cbn = is_ctor;
            if (is_ctor) {
                b.label = label();
                while (!ts_.is_sym("->")) {
                    SParam prm;
                    if (ts_.accept("(")) {
                        prm.name = ident();
                        if (ts_.accept(":")) prm.type = vtype();
                        ts_.expect(")");
                    } else {
                        prm.name = ident();
                    }
                    b.params.push_back(std::move(prm));
                }
            } else if (t.kind == Tok::Number) {
                b.label = int_label(constant(ts_.next()));
            } else if (kw("true")) {
                b.label = true_label();
            } else if (kw("false")) {
                b.label = false_label();
            } else {
                ts_.fail("expected a pattern");
            }
            ts_.expect("->");
            b.body = stmt();
            bs.push_back(std::move(b));
        } while (ts_.accept("|"));
        ts_.expect("}");
        SNode n = node(cbn ? SK::CaseCBN : SK::CaseOf, p);
        n.kids = {scrut};
        n.branches = std::move(bs);
        return mk(std::move(n));
    }

    unsigned constant(const Token& t) {
        unsigned long v = std::stoul(t.text);
        if (v >= cfg_.modulus)
            throw ParseError("constant " + t.text + " out of range for modulus " + std::to_string(cfg_.modulus),
                             t.line, t.col);
        return static_cast<unsigned>(v);
    }

    SPtr comparison() {
        auto l = sum();
        if (ts_.is_sym("<")) {
            auto p = at(ts_.next());
            SNode n = node(SK::BinOp, p);
            n.name = "<";
            n.kids = {l, sum()};
            return mk(std::move(n));
        }
        return l;
    }

    SPtr sum() {
        auto l = application();
        while (ts_.is_sym("+")) {
            auto p = at(ts_.next());
            SNode n = node(SK::BinOp, p);
            n.name = "+";
            n.kids = {l, application()};
            l = mk(std::move(n));
        }
        return l;
    }

    bool atom_ahead() const {
        const auto& t = ts_.peek();
        switch (t.kind) {
            case Tok::Number:
            case Tok::Choice: return true;
            case Tok::Ident:
                return !keywords.count(t.text) || t.text == "true" || t.text == "false" || t.text == "read" ||
                       t.text == "sample";
            case Tok::Sym: return t.text == "(" || t.text == "[" || t.text == "!" || t.text == "{";
            default: return false;
        }
    }

    SPtr application() {
        auto f = atom();
        while (atom_ahead()) {
            auto p = at(ts_.peek());
            SNode n = node(SK::AppV, p);
            n.kids = {f, atom()};
            f = mk(std::move(n));
        }
        return f;
    }

    SPtr atom() {
        const auto& t = ts_.peek();
        auto p = at(t);
        if (t.kind == Tok::Number) {
            SNode n = node(SK::Const, p);
            n.num = constant(ts_.next());
            return mk(std::move(n));
        }
        if (kw("true")) return mk(node(SK::True, p));
        if (kw("false")) return mk(node(SK::False, p));
        if (kw("read")) return mk(node(SK::Read, p));
        if (kw("sample")) return mk(node(SK::Sample, p));
        if (ts_.accept("!")) {
            SNode n = node(SK::Deref, p);
            n.name = ident();
            return mk(std::move(n));
        }
        if (ts_.accept("(")) return block(")");
        if (ts_.accept("{")) return block("}");
        if (ts_.accept("[")) {
            SNode n = node(SK::ReturnV, p);
            n.kids = {expr()};
            ts_.expect("]");
            return mk(std::move(n));
        }
        if (t.kind == Tok::Choice) {
            SNode n = node(SK::Ctor, p);
            n.label = label();
            if (ts_.accept("(")) {
                do n.kids.push_back(expr());
                while (ts_.accept(","));
                ts_.expect(")");
            }
            return mk(std::move(n));
        }
        SNode n = node(SK::VarV, p);
        n.name = ident();
        return mk(std::move(n));
    }
};

Term case_chain(Term scrut, const std::vector<std::pair<ChoiceLabel, Term>>& arms) {
    for (const auto& [c, arm] : arms) scrut = kase(scrut, c, arm);
    return scrut;
}

Term ret(Term v) { return push(std::move(v), star()); }

TypePtr tp(ValueType t) { return std::make_shared<const ValueType>(std::move(t)); }

class Desugarer {
public:
    Desugarer(const SurfaceOptions& opt, const SurfaceProgram* prog) : opt_(opt) {
        Z_ = int_type(opt.ints.modulus);
        B_ = bool_type();
        for (unsigned k = 0; k < opt.ints.modulus; ++k) constants_.insert(int_label(k));
        constants_.insert(true_label());
        constants_.insert(false_label());
        if (prog) {
            for (const auto& [a, t] : prog->cells) cells_[a] = t;
            for (const auto& d : prog->data) add_data(d);
        }
    }

    void add_data(const DataDecl& d) {
        for (const auto& [c, args] : d.ctors) {
            if (ctors_.count(c)) throw DesugarError("constructor " + to_string(c) + " declared twice");
            ctors_[c] = args;
            constants_.insert(c);
        }
    }

    void plan_initialization(const SPtr& body) {
        std::vector<SPtr> items;
        flatten(body, items);
        std::set<std::string> seen;
        for (const auto& s : items) {
            if (s->kind == SK::Assign && !seen.count(s->name)) {
                std::set<std::string> inner;
                cells_used(s->kids[0], inner);
                if (!inner.count(s->name)) init_.insert(s.get());
            }
            cells_used(s, seen);
        }
    }

    Term run(const SPtr& s) {
        switch (s->kind) {
            case SK::Skip: return star();
            case SK::Seq: return seq(run(s->kids[0]), run(s->kids[1]));
            case SK::Assign: {
                Location c(s->name);
                ValueType t = cell_type(c);
                Term m = run(s->kids[0]);
                Term x = var("x");
                if (init_.count(s.get())) return seq(m, pop(Location(), "x", push(x, c, star()), tp(t), s->pos));
                return seq(m, pop(Location(), "x", pop(c, "_", push(x, c, star()), tp(t)), tp(t), s->pos));
            }
            case SK::Deref: {
                Location c(s->name);
                Term x = var("x");
                return pop(c, "x", push(x, c, ret(x)), tp(cell_type(c)), s->pos);
            }
            case SK::Print: {
                Term m = run(s->kids[0]);
                return seq(m, pop(Location(), "x", push(var("x"), out_loc(), star()), tp(value_type(m)), s->pos));
            }
            case SK::Read: return pop(in_loc(), "x", ret(var("x")), tp(Z_), s->pos);
            case SK::Sample: return pop(rnd_loc(), "x", ret(var("x")), tp(Z_), s->pos);
            case SK::If: {
                Term b = seq(run(s->kids[0]), pop(Location(), "x", var("x"), tp(B_)));
                return case_chain(b, {{true_label(), run(s->kids[1])}, {false_label(), run(s->kids[2])}});
            }
            case SK::While: {
                Term b = seq(run(s->kids[0]), pop(Location(), "x", var("x"), tp(B_)));
                Term body = loop(kase(b, true_label(), run(s->kids[1])), ChoiceLabel::star(), s->pos);
                return case_chain(body, {{false_label(), star()}, {break_label(), star()}});
            }
            case SK::DoWhile: {
                Term b = seq(seq(run(s->kids[0]), run(s->kids[1])), pop(Location(), "x", var("x"), tp(B_)));
                Term body = loop(b, true_label(), s->pos);
                return case_chain(body, {{false_label(), star()}, {break_label(), star()}});
            }
            case SK::Try:
                exception(s->label, s->pos);
                return kase(run(s->kids[0]), s->label, run(s->kids[1]), s->pos);
            case SK::Throw: exception(s->label, s->pos); return choice(s->label, s->pos);
            case SK::Break: return choice(break_label(), s->pos);
            case SK::Return: return push(run(s->kids[0]), Location(), choice(return_label()), s->pos);
            case SK::CaseOf: {
                Term m = run(s->kids[0]);
                ValueType t = value_type(m);
                Term sel = seq(m, pop(Location(), "x", var("x"), tp(t)));
                std::vector<std::pair<ChoiceLabel, Term>> arms;
                for (const auto& b : s->branches) arms.emplace_back(b.label, run(b.body));
                return case_chain(sel, arms);
            }
            case SK::Const: return ret(choice(int_label(s->num), s->pos));
            case SK::True: return ret(choice(true_label(), s->pos));
            case SK::False: return ret(choice(false_label(), s->pos));
            case SK::BinOp: {
                const IntOps& ops = intops();
                Term op = s->name == "+" ? ops.plus : ops.less;
                return seq(seq(run(s->kids[0]), run(s->kids[1])), op);
            }
            case SK::VarV: {
                auto it = env_.find(s->name);
                if (it != env_.end() && it->second.cbn) return var(s->name, s->pos);
                return ret(var(s->name, s->pos));
            }
            case SK::LamV: {
                ValueType t = s->type ? *s->type : Z_;
                Term body = bind(s->name, {false, t}, [&] { return run(s->kids[0]); });
                return ret(pop(Location(), s->name, body, tp(t), s->pos));
            }
            case SK::AppV: {
                Term f = run(s->kids[0]);
                Term a = run(s->kids[1]);
                ValueType tf = value_type(f);
                if (opt_.function_first) {
                    ValueType ta = value_type(a);
                    Term body = push(var("y"), Location(), var("x"));
                    return seq(seq(f, a), pop(Location(), "y", pop(Location(), "x", body, tp(tf)), tp(ta), s->pos));
                }
                return seq(seq(a, f), pop(Location(), "x", var("x"), tp(tf), s->pos));
            }
            case SK::LetV: {
                Term m = run(s->kids[0]);
                ValueType t = value_type(m);
                Term body = bind(s->name, {false, t}, [&] { return run(s->kids[1]); });
                return seq(m, pop(Location(), s->name, body, tp(t), s->pos));
            }
            case SK::ReturnV: return ret(run(s->kids[0]));
            case SK::Ctor: {
                auto it = ctors_.find(s->label);
                if (it != ctors_.end() && it->second.size() != s->kids.size())
                    throw DesugarError("constructor " + to_string(s->label) + " expects " +
                                           std::to_string(it->second.size()) + " arguments",
                                       s->pos);
                Term t = choice(s->label, s->pos);
                for (const auto& k : s->kids) t = push(run(k), Location(), t);
                return t;
            }
            case SK::CaseCBN: return case_cbn(s);
        }
        throw DesugarError("unsupported construct", s->pos);
    }

private:
    struct Binding {
        bool cbn;
        ValueType type;
    };

    const SurfaceOptions& opt_;
    ValueType Z_, B_;
    std::optional<IntOps> ops_;
    std::set<ChoiceLabel> constants_;
    std::map<Location, ValueType> cells_;
    std::map<ChoiceLabel, std::vector<ValueType>> ctors_;
    std::set<const SNode*> init_;
    std::map<Identifier, Binding> env_;

    const IntOps& intops() {
        if (!ops_) ops_ = gen_intops(opt_.ints);
        return *ops_;
    }

    ValueType cell_type(const Location& c) const {
        auto it = cells_.find(c);
        return it == cells_.end() ? Z_ : it->second;
    }

    void exception(const ChoiceLabel& e, SrcPos p) const {
        if (constants_.count(e))
            throw DesugarError("exception " + to_string(e) + " clashes with a constant label", p);
    }

    template <class F>
    Term bind(const Identifier& x, Binding b, F&& body) {
        auto saved = env_.find(x) == env_.end() ? std::nullopt : std::optional<Binding>(env_.at(x));
        env_[x] = std::move(b);
        Term t;
        try {
            t = body();
        } catch (...) {
            restore(x, saved);
            throw;
        }
        restore(x, saved);
        return t;
    }

    void restore(const Identifier& x, const std::optional<Binding>& saved) {
        if (saved)
            env_[x] = *saved;
        else
            env_.erase(x);
    }

    Context context() const {
        Context g;
        for (const auto& [x, b] : env_) g[x] = b.type;
        return g;
    }

    // Type of the value m leaves on top of the main stack, with Z and B preferred.
    ValueType value_type(const Term& m) const {
        try {
            ValueType t = synthesize(context(), m);
            auto it = t.out.branch.find(ChoiceLabel::star());
            if (it != t.out.branch.end()) {
                const StackType& st = it->second.get(Location());
                if (!st.empty()) {
                    const ValueType& v = st.back();
                    if (subsume(v, Z_)) return Z_;
                    if (subsume(v, B_)) return B_;
                    return v;
                }
            }
        } catch (const TypeError&) {
        }
        return Z_;
    }

    Term case_cbn(const SPtr& s) {
        Term scrut = run(s->kids[0]);
        std::vector<std::pair<ChoiceLabel, Term>> arms;
        std::optional<ValueType> thunk;
        for (const auto& b : s->branches) {
            auto it = ctors_.find(b.label);
            if (it != ctors_.end() && it->second.size() != b.params.size())
                throw DesugarError("pattern " + to_string(b.label) + " binds " + std::to_string(b.params.size()) +
                                       " variables, constructor has " + std::to_string(it->second.size()),
                                   b.body->pos);
            std::vector<ValueType> types;
            for (std::size_t k = 0; k < b.params.size(); ++k) {
                if (b.params[k].type)
                    types.push_back(*b.params[k].type);
                else if (it != ctors_.end())
                    types.push_back(it->second[k]);
                else
                    throw DesugarError("no type for pattern variable " + b.params[k].name, b.body->pos);
            }
            auto saved = env_;
            for (std::size_t k = 0; k < b.params.size(); ++k) env_[b.params[k].name] = {true, types[k]};
            Term n;
            try {
                n = run(b.body);
            } catch (...) {
                env_ = saved;
                throw;
            }
            try {
                ValueType tn = synthesize(context(), n);
                if (!thunk)
                    thunk = tn;
                else if (auto j = join(*thunk, tn))
                    thunk = *j;
            } catch (const TypeError&) {
            }
            env_ = saved;
            Term arm = ret(n);
            for (std::size_t k = b.params.size(); k-- > 0;)
                arm = pop(Location(), b.params[k].name, arm, tp(types[k]));
            arms.emplace_back(b.label, arm);
        }
        Term sel = case_chain(scrut, arms);
        ValueType tx = thunk ? *thunk : ValueType{};
        return seq(sel, pop(Location(), "x", var("x"), tp(tx), s->pos));
    }

    static void flatten(const SPtr& s, std::vector<SPtr>& out) {
        if (s->kind == SK::Seq) {
            flatten(s->kids[0], out);
            flatten(s->kids[1], out);
        } else {
            out.push_back(s);
        }
    }

    static void cells_used(const SPtr& s, std::set<std::string>& out) {
        if (s->kind == SK::Assign || s->kind == SK::Deref) out.insert(s->name);
        for (const auto& k : s->kids) cells_used(k, out);
        for (const auto& b : s->branches) cells_used(b.body, out);
    }
};

}  // namespace

SurfaceProgram parse_surface(std::string_view src, const IntConfig& cfg) {
    if (cfg.modulus < 2) throw DesugarError("modulus must be at least 2");
    TokenStream ts(lex(src));
    SurfaceProgram prog;
    SurfaceParser p(ts, cfg, prog);
    prog.body = p.program();
    return prog;
}

Term desugar(const SurfaceProgram& p, const SurfaceOptions& opt) {
    Desugarer d(opt, &p);
    d.plan_initialization(p.body);
    return d.run(p.body);
}

Term desugar_source(std::string_view src, const SurfaceOptions& opt) {
    return desugar(parse_surface(src, opt.ints), opt);
}

Term desugar_cbv(const SPtr& e, const SurfaceOptions& opt) {
    Desugarer d(opt, nullptr);
    return d.run(e);
}

Term desugar_cbn_data(const DataDecl& decl, const SPtr& e, const SurfaceOptions& opt) {
    Desugarer d(opt, nullptr);
    d.add_data(decl);
    return d.run(e);
}

IntOps gen_intops(const IntConfig& cfg) {
    unsigned m = cfg.modulus;
    if (m < 2) throw DesugarError("modulus must be at least 2");
    IntOps ops;
    ops.Z = int_type(m);
    ops.B = bool_type();
    auto table = [&](auto result) {
        std::vector<std::pair<ChoiceLabel, Term>> outer;
        for (unsigned a = 0; a < m; ++a) {
            std::vector<std::pair<ChoiceLabel, Term>> inner;
            for (unsigned b = 0; b < m; ++b) inner.emplace_back(int_label(b), ret(choice(result(a, b))));
            outer.emplace_back(int_label(a), case_chain(var("q"), inner));
        }
        Term body = case_chain(var("p"), outer);
        return pop(Location(), "q", pop(Location(), "p", body, tp(ops.Z)), tp(ops.Z));
    };
    ops.plus = table([&](unsigned a, unsigned b) { return int_label((a + b) % m); });
    ops.less = table([&](unsigned a, unsigned b) { return a < b ? true_label() : false_label(); });
    return ops;
}

}  // namespace fmc
