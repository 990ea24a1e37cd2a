#include <optional>

#include "fmc/syntax.hpp"

namespace fmc {

namespace {

std::optional<std::string> type_name(const ValueType& t, const TypeNames* names) {
    if (names)
        for (const auto& [n, v] : *names)
            if (v == t) return n;
    return std::nullopt;
}

std::string type_item(const ValueType& t, const TypeNames* names) {
    if (auto n = type_name(t, names)) return *n;
    return "(" + print_type(t, names) + ")";
}

std::string memtype_str(const MemType& m, const TypeNames* names, bool reversed) {
    if (m.empty()) return "e";
    std::string out;
    for (const auto& [loc, st] : m.at) {
        std::string items;
        auto emit = [&](const ValueType& v) {
            if (!items.empty()) items += ' ';
            items += type_item(v, names);
        };
        if (reversed)
            for (auto it = st.rbegin(); it != st.rend(); ++it) emit(*it);
        else
            for (const auto& v : st) emit(v);
        if (!out.empty()) out += ' ';
        out += loc.is_default() ? items : loc.name + "(" + items + ")";
    }
    return out;
}

// Precedence levels: 0 cases, 1 looped, 2 prefix, 3 atom.
int level(const Term& t) {
    switch (t->kind) {
        case Kind::Case: return 0;
        case Kind::Loop: return 1;
        case Kind::Push:
        case Kind::Pop: return 2;
        default: return 3;
    }
}

void emit(const Term& t, int ctx, const TypeNames* names, std::string& out) {
    bool paren = level(t) < ctx;
    if (paren) out += '(';
    switch (t->kind) {
        case Kind::Var: out += t->name; break;
        case Kind::Choice: out += to_string(t->label); break;
        case Kind::Push:
            out += '[';
            emit(t->a, 0, names, out);
            out += ']';
            out += t->loc.name;
            out += '.';
            emit(t->b, 2, names, out);
            break;
        case Kind::Pop:
            out += t->loc.name;
            out += '<';
            out += t->name;
            if (t->annot) {
                out += ':';
                auto n = type_name(*t->annot, names);
                out += n ? *n : print_type(*t->annot, names);
            }
            out += ">.";
            emit(t->b, 2, names, out);
            break;
        case Kind::Case:
            emit(t->a, 0, names, out);
            out += ';';
            if (!t->label.is_star()) {
                out += to_string(t->label);
                out += "->";
            }
            emit(t->b, 1, names, out);
            break;
        case Kind::Loop:
            emit(t->a, 1, names, out);
            out += '^';
            out += to_string(t->label);
            break;
    }
    if (paren) out += ')';
}

}  // namespace

std::string print(const Term& t, const TypeNames* names) {
    std::string out;
    emit(t, 0, names, out);
    return out;
}

std::string print_memtype(const MemType& m, const TypeNames* names) { return memtype_str(m, names, false); }

std::string print_sumtype(const SumType& s, const TypeNames* names) {
    if (s.empty()) return "0";
    std::string out;
    for (const auto& [c, m] : s.branch) {
        if (!out.empty()) out += " + ";
        out += memtype_str(m, names, false) + "." + to_string(c);
    }
    return out;
}

std::string print_type(const ValueType& t, const TypeNames* names) {
    return memtype_str(t.in, names, true) + " => " + print_sumtype(t.out, names);
}

}  // namespace fmc
