#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "fmc/machine.hpp"
#include "fmc/syntax.hpp"

namespace fmc {

struct TypeError : std::runtime_error {
    SrcPos pos;
    TypeError(const std::string& msg, SrcPos p = {});
};

using Context = std::map<Identifier, ValueType>;

// Prepend s below the input and below every output branch.
ValueType expand(const ValueType& t, const MemType& s);
MemType expand(const MemType& m, const MemType& s);
// Adds output branches; throws TypeError when a choice is already present.
ValueType include(const ValueType& t, const SumType& extra);

struct Expansions {
    MemType e1;
    MemType e2;
};
// Least (e1, e2) with expand(t1,e1) and expand(t2,e2) equal on inputs and on
// shared output choices. nullopt when top-aligned parts conflict.
std::optional<Expansions> match_types(const ValueType& t1, const ValueType& t2);

// s <= t: a term of type s also has type t. Inputs are fixed up to expansion;
// output value types may be raised, since every output slot is produced by a
// push whose argument can itself be retyped.
bool subsume(const ValueType& syn, const ValueType& goal);
std::optional<ValueType> join(const ValueType& s, const ValueType& t);

ValueType synthesize(const Context& g, const Term& t);
void check(const Context& g, const Term& t, const ValueType& goal);

ValueType type_state(const State& s, const MemType* hypothesis = nullptr);

// Zero terms; binders are annotated so the result synthesizes.
Term inhabit(const ValueType& t);
Memory zero_memory(const MemType& m);

ValueType int_type(unsigned modulus);
ValueType bool_type();
ChoiceLabel int_label(unsigned k);
ChoiceLabel true_label();
ChoiceLabel false_label();
TypeNames standard_names(unsigned modulus = 8);

}  // namespace fmc
