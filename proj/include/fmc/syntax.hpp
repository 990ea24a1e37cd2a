#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fmc/term.hpp"

namespace fmc {

std::set<Identifier> free_vars(const Term& t);
bool occurs_free(const Identifier& x, const Term& t);

// {n/x}m, capture-avoiding. Binders inside each inserted copy of n are renamed
// apart so that repeated substitution never produces shadowing.
// Throws TermTooLarge when the result would exceed kMaxTermSize nodes. Fresh
// names also avoid *context, which receives every name handed out; pass the
// names of an enclosing term to keep binders distinct across it.
Term substitute(const Term& n, const Identifier& x, const Term& m, std::set<Identifier>* context = nullptr);

constexpr std::size_t kMaxTermSize = std::size_t{1} << 21;

struct TermTooLarge : std::runtime_error {
    TermTooLarge() : std::runtime_error("term exceeds the size limit") {}
};

bool alpha_eq(const Term& t, const Term& u);
std::size_t size(const Term& t);
// min(size(t), cap), visiting at most cap nodes.
std::size_t size_capped(const Term& t, std::size_t cap);
bool loop_free(const Term& t);

// stem'k for the least k >= 1 not in `avoid`, where stem drops any 'k suffix.
Identifier fresh_name(const Identifier& base, const std::set<Identifier>& avoid = {});
// Same, resuming the search per stem from `hints`; valid while `avoid` only grows.
Identifier fresh_name(const Identifier& base, const std::set<Identifier>& avoid,
                      std::map<std::string, unsigned long>& hints);
// All names (free, bound, binders) occurring in t.
void collect_names(const Term& t, std::set<Identifier>& out);

struct ParseError : std::runtime_error {
    int line;
    int col;
    ParseError(const std::string& msg, int l, int c);
};

// Named value types usable in type syntax, e.g. Z and B.
using TypeNames = std::map<std::string, ValueType>;

Term parse(std::string_view src, const TypeNames& names = {});
ValueType parse_type(std::string_view src, const TypeNames& names = {});

std::string print(const Term& t, const TypeNames* names = nullptr);
std::string print_type(const ValueType& t, const TypeNames* names = nullptr);
std::string print_memtype(const MemType& m, const TypeNames* names = nullptr);
std::string print_sumtype(const SumType& s, const TypeNames* names = nullptr);

}  // namespace fmc
