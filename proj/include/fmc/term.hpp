#pragma once

#include <memory>
#include <optional>
#include <string>

#include "fmc/label.hpp"
#include "fmc/vtype.hpp"

namespace fmc {

enum class Kind { Var, Push, Pop, Choice, Case, Loop };

struct Node;
using Term = std::shared_ptr<const Node>;

struct SrcPos {
    int line = 0;
    int col = 0;
};

// Field use per kind:
//   Var    name
//   Push   a = argument, loc, b = continuation
//   Pop    loc, name = binder, annot, b = continuation
//   Choice label
//   Case   a = body, label, b = handler
//   Loop   a = body, label
struct Node {
    Kind kind = Kind::Var;
    Identifier name;
    Location loc;
    ChoiceLabel label;
    TypePtr annot;
    Term a;
    Term b;
    SrcPos pos;
};

Term var(Identifier x, SrcPos p = {});
Term push(Term arg, Location loc, Term cont, SrcPos p = {});
Term pop(Location loc, Identifier x, Term cont, TypePtr annot = nullptr, SrcPos p = {});
Term choice(ChoiceLabel i, SrcPos p = {});
Term kase(Term body, ChoiceLabel i, Term handler, SrcPos p = {});
Term loop(Term body, ChoiceLabel i, SrcPos p = {});

// Convenience for the default location / star choice.
inline Term push(Term arg, Term cont) { return push(std::move(arg), Location(), std::move(cont)); }
inline Term pop(Identifier x, Term cont) { return pop(Location(), std::move(x), std::move(cont)); }
inline Term star() { return choice(ChoiceLabel::star()); }
inline Term seq(Term m, Term n) { return kase(std::move(m), ChoiceLabel::star(), std::move(n)); }

// Number of children and child access by RedexPath index.
int arity(const Term& t);
const Term& child(const Term& t, int i);
Term with_child(const Term& t, int i, Term c);

}  // namespace fmc
