#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

enum class RRule { Beta, Passage, Select, Reject, PrefixPop, PrefixPush, Associate, Unroll };

const char* rule_name(RRule r);
inline bool duplicating(RRule r) { return r == RRule::Beta || r == RRule::Unroll; }
inline bool affine(RRule r) { return !duplicating(r); }

// Child indices from the root: Push 0=argument 1=continuation, Pop 0=body,
// Case 0=body 1=handler, Loop 0=body.
using RedexPath = std::vector<int>;

struct Redex {
    RedexPath path;
    RRule rule;
};

struct RewriteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<RRule> redex_at(const Term& t);
// Pre-order, arguments before continuations: leftmost-outermost first.
std::vector<Redex> redexes(const Term& t, bool include_unroll = true);

const Term& subterm(const Term& t, const RedexPath& p);
Term replace_at(const Term& t, const RedexPath& p, const Term& u);
Term contract(const Term& t, RRule r);
Term apply(const Term& t, const RedexPath& p, RRule r);

// Head positions: the root, the continuation of a push, and the body of a
// case. Returns nullopt when no head redex exists.
std::optional<Redex> weak_head_redex(const Term& t);
std::optional<Term> weak_head_step(const Term& t);

// Representative modulo swapping adjacent pushes on distinct locations
// ([M]a.[N]b.P = [N]b.[M]a.P); this is an equation, not a rewrite rule.
Term canonical_pushes(const Term& t);

std::pair<std::size_t, std::size_t> affine_measure(const Term& t);
Term affine_normalize(const Term& t);

struct UnrollPolicy {
    bool forbid = true;
    std::size_t bound = 0;
    static UnrollPolicy Forbid() { return {}; }
    static UnrollPolicy Bounded(std::size_t k) { return {false, k}; }
};

struct ReductionStep {
    std::size_t n;
    RRule rule;
    RedexPath path;
    Term before;
    Term after;
};
using ReductionTrace = std::vector<ReductionStep>;

std::string reduction_text(const ReductionTrace& tr);
std::string reduction_json(const ReductionTrace& tr);
std::string path_string(const RedexPath& p);

struct NormalizeResult {
    Term term;
    bool exhausted = false;
    std::size_t steps = 0;
};

NormalizeResult normalize(const Term& t, std::size_t fuel, UnrollPolicy policy = UnrollPolicy::Forbid(),
                          ReductionTrace* trace = nullptr);

// Marked reduct for the given set of duplicating redexes.
Term marked_reduct(const Term& t, const std::set<RedexPath>& marks);
Term complete_development(const Term& t);
Term complete_step(const Term& t);

}  // namespace fmc
