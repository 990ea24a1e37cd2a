#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

// Location-indexed stacks; back() of each vector is the head. Empty stacks are
// never stored, so structural comparison is meaningful.
struct Memory {
    std::map<Location, std::vector<Term>> stacks;

    bool empty() const { return stacks.empty(); }
    void push(const Location& a, Term t) { stacks[a].push_back(std::move(t)); }
    std::optional<Term> pop(const Location& a);
    std::size_t depth(const Location& a) const;
};

bool alpha_eq(const Memory& m, const Memory& n);
std::string print_memory(const Memory& m);

struct ContFrame {
    ChoiceLabel label;
    Term term;
};

// back() is the head of the continuation stack.
using ContStack = std::vector<ContFrame>;

struct State {
    Memory mem;
    Term term;
    ContStack cont;
};

enum class Rule { Push, Pop, Select, Skip, Case, Loop };
enum class StuckReason { FreeVariable, EmptyPop };

const char* rule_name(Rule r);
const char* reason_name(StuckReason r);

struct StepResult {
    enum Kind { Next, Final, Stuck } kind;
    Rule rule{};
    StuckReason reason{};
};

// Advances s in place when a transition applies.
StepResult step(State& s);

struct TraceRecord {
    std::size_t step;
    Rule rule;
    Memory mem;
    Term term;
    std::size_t depth;
};
using Trace = std::vector<TraceRecord>;

std::string trace_text(const Trace& t);
std::string trace_json(const Trace& t);

struct RunResult {
    enum Kind { Final, Stuck, FuelExhausted } kind;
    State state;
    ChoiceLabel choice;  // Final only
    std::size_t steps = 0;
    std::size_t pops = 0;
    StuckReason reason{};  // Stuck only
};

std::size_t default_fuel();  // 10000, or FMC_FUEL when set

RunResult run(const Term& t, const Memory& init, std::size_t fuel, Trace* trace = nullptr);
RunResult run_state(State s, std::size_t fuel, Trace* trace = nullptr);

// Continuations are absorbed first (head innermost), then memory as pushes in
// location order with each head innermost.
Term readback(const State& s);

}  // namespace fmc
