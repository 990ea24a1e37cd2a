#include <cctype>
#include <memory>

#include "fmc/lexer.hpp"

namespace fmc {

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
                ++col;
            }
        }
    };
    auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto ident_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (s.substr(i, 2) == "--") {
            while (i < s.size() && s[i] != '\n') advance(1);
            continue;
        }
        int l = line, cl = col;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), l, cl});
            advance(j - i);
            continue;
        }
        if (s.substr(i, 2) == "\xCE\xB5") {  // epsilon
            out.push_back({Tok::Ident, "ε", l, cl});
            advance(2);
            continue;
        }
        if (c == '\'') {
            if (i + 1 < s.size() && s[i + 1] == '*') {
                out.push_back({Tok::Choice, "", l, cl});
                advance(2);
                continue;
            }
            std::size_t j = i + 1;
            if (j >= s.size() || !ident_start(s[j])) throw ParseError("expected choice name after '", l, cl);
            while (j < s.size() && ident_char(s[j])) ++j;
            out.push_back({Tok::Choice, std::string(s.substr(i + 1, j - i - 1)), l, cl});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({Tok::Number, std::string(s.substr(i, j - i)), l, cl});
            advance(j - i);
            continue;
        }
        static const char* two[] = {"->", "=>", ":="};
        bool matched = false;
        for (auto* t : two) {
            if (s.substr(i, 2) == t) {
                out.push_back({Tok::Sym, t, l, cl});
                advance(2);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        static const std::string one = "[].<>:();^+*{},=!\\|";
        if (one.find(c) != std::string::npos) {
            out.push_back({Tok::Sym, std::string(1, c), l, cl});
            advance(1);
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

namespace {

bool is_empty_word(const Token& t) { return t.kind == Tok::Ident && (t.text == "e" || t.text == "ε"); }

ValueType type_atom(TokenStream& ts, const TypeNames& names) {
    if (ts.accept("(")) {
        auto t = parse_vtype(ts, names);
        ts.expect(")");
        return t;
    }
    if (ts.peek().kind == Tok::Ident) {
        auto it = names.find(ts.peek().text);
        if (it != names.end()) {
            ts.next();
            return it->second;
        }
        ts.fail("unknown type name");
    }
    ts.fail("expected a type");
}

// Items in written order, grouped per location.
MemType memtype(TokenStream& ts, const TypeNames& names, bool reversed) {
    std::map<Location, StackType> acc;
    for (;;) {
        const auto& t = ts.peek();
        if (is_empty_word(t) && !ts.is_sym("(", 1)) {
            ts.next();
            continue;
        }
        if (t.kind == Tok::Ident && ts.is_sym("(", 1) && !names.count(t.text)) {
            Location a(ts.next().text);
            ts.expect("(");
            while (!ts.is_sym(")")) acc[a].push_back(type_atom(ts, names));
            ts.expect(")");
            continue;
        }
        if (t.kind == Tok::Ident && names.count(t.text)) {
            acc[Location()].push_back(type_atom(ts, names));
            continue;
        }
        if (ts.is_sym("(")) {
            acc[Location()].push_back(type_atom(ts, names));
            continue;
        }
        break;
    }
    MemType m;
    for (auto& [loc, st] : acc) {
        if (reversed) std::reverse(st.begin(), st.end());
        m.set(loc, std::move(st));
    }
    return m;
}

ChoiceLabel choice_tok(TokenStream& ts) {
    if (ts.peek().kind == Tok::Choice) return ChoiceLabel(ts.next().text);
    if (ts.accept("*")) return ChoiceLabel::star();
    ts.fail("expected a choice");
}

SumType sumtype(TokenStream& ts, const TypeNames& names) {
    SumType s;
    if (ts.peek().kind == Tok::Number && ts.peek().text == "0") {
        ts.next();
        return s;
    }
    do {
        auto m = memtype(ts, names, false);
        ts.expect(".");
        auto c = choice_tok(ts);
        if (s.has(c)) ts.fail("duplicate choice in sum type");
        s.branch[c] = std::move(m);
    } while (ts.accept("+"));
    return s;
}

class TermParser {
public:
    TermParser(TokenStream& ts, const TypeNames& names) : ts_(ts), names_(names) {}

    Term term() { return cases(); }

private:
    TokenStream& ts_;
    const TypeNames& names_;

    static SrcPos at(const Token& t) { return {t.line, t.col}; }

    bool choice_ahead(std::size_t k) const {
        return ts_.peek(k).kind == Tok::Choice || ts_.is_sym("*", k);
    }

    Term cases() {
        auto t = looped();
        while (ts_.is_sym(";")) {
            auto p = at(ts_.next());
            ChoiceLabel i;
            if (choice_ahead(0) && ts_.is_sym("->", 1)) {
                i = choice_tok(ts_);
                ts_.next();
            }
            t = kase(t, i, looped(), p);
        }
        return t;
    }

    Term looped() {
        auto t = prefix();
        while (ts_.is_sym("^")) {
            auto p = at(ts_.next());
            t = loop(t, choice_tok(ts_), p);
        }
        return t;
    }

    Term prefix() {
        const auto& t = ts_.peek();
        auto p = at(t);
        if (ts_.accept("[")) {
            auto arg = term();
            ts_.expect("]");
            Location a;
            if (ts_.peek().kind == Tok::Ident) a = Location(ts_.next().text);
            ts_.expect(".");
            return push(arg, a, prefix(), p);
        }
        if (t.kind == Tok::Ident && ts_.is_sym("<", 1)) {
            Location a(ts_.next().text);
            return binder(a, p);
        }
        if (ts_.is_sym("<")) return binder(Location(), p);
        return atom();
    }

    Term binder(Location a, SrcPos p) {
        ts_.expect("<");
        if (ts_.peek().kind != Tok::Ident) ts_.fail("expected a variable");
        auto x = ts_.next().text;
        TypePtr annot;
        if (ts_.accept(":")) annot = std::make_shared<const ValueType>(parse_vtype(ts_, names_));
        ts_.expect(">");
        ts_.expect(".");
        return pop(a, x, prefix(), annot, p);
    }

    Term atom() {
        const auto& t = ts_.peek();
        auto p = at(t);
        if (t.kind == Tok::Ident) {
            if (t.text == "_") ts_.fail("'_' may not be used as a variable");
            return var(ts_.next().text, p);
        }
        if (choice_ahead(0)) return choice(choice_tok(ts_), p);
        if (ts_.accept("(")) {
            auto r = term();
            ts_.expect(")");
            return r;
        }
        ts_.fail("expected a term");
    }
};

}  // namespace

ValueType parse_vtype(TokenStream& ts, const TypeNames& names) {
    ValueType t;
    std::size_t start = ts.pos();
    const Token first = ts.peek();
    t.in = memtype(ts, names, true);
    // A lone type name stands for the named type itself.
    if (!ts.is_sym("=>") && ts.pos() == start + 1 && first.kind == Tok::Ident && names.count(first.text))
        return names.at(first.text);
    ts.expect("=>");
    t.out = sumtype(ts, names);
    return t;
}

Term parse(std::string_view src, const TypeNames& names) {
    TokenStream ts(lex(src));
    TermParser p(ts, names);
    auto t = p.term();
    if (ts.peek().kind != Tok::End) ts.fail("unexpected trailing input");
    return t;
}

ValueType parse_type(std::string_view src, const TypeNames& names) {
    TokenStream ts(lex(src));
    auto t = parse_vtype(ts, names);
    if (ts.peek().kind != Tok::End) ts.fail("unexpected trailing input");
    return t;
}

}  // namespace fmc
