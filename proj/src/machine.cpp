#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "fmc/machine.hpp"

namespace fmc {

std::optional<Term> Memory::pop(const Location& a) {
    auto it = stacks.find(a);
    if (it == stacks.end()) return std::nullopt;
    Term t = std::move(it->second.back());
    it->second.pop_back();
    if (it->second.empty()) stacks.erase(it);
    return t;
}

std::size_t Memory::depth(const Location& a) const {
    auto it = stacks.find(a);
    return it == stacks.end() ? 0 : it->second.size();
}

bool alpha_eq(const Memory& m, const Memory& n) {
    if (m.stacks.size() != n.stacks.size()) return false;
    auto j = n.stacks.begin();
    for (auto i = m.stacks.begin(); i != m.stacks.end(); ++i, ++j) {
        if (i->first != j->first || i->second.size() != j->second.size()) return false;
        for (std::size_t k = 0; k < i->second.size(); ++k)
            if (!alpha_eq(i->second[k], j->second[k])) return false;
    }
    return true;
}

std::string print_memory(const Memory& m) {
    if (m.empty()) return "ε";
    std::string out;
    for (const auto& [loc, st] : m.stacks) {
        if (!out.empty()) out += ' ';
        out += display(loc) + ":(";
        for (std::size_t k = 0; k < st.size(); ++k) {
            if (k) out += ", ";
            out += print(st[k]);
        }
        out += ')';
    }
    return out;
}

const char* rule_name(Rule r) {
    switch (r) {
        case Rule::Push: return "push";
        case Rule::Pop: return "pop";
        case Rule::Select: return "select";
        case Rule::Skip: return "skip";
        case Rule::Case: return "case";
        case Rule::Loop: return "loop";
    }
    return "?";
}

const char* reason_name(StuckReason r) {
    return r == StuckReason::FreeVariable ? "FreeVariable" : "EmptyPop";
}

StepResult step(State& s) {
    const Term t = s.term;
    switch (t->kind) {
        case Kind::Var: return {StepResult::Stuck, {}, StuckReason::FreeVariable};
        case Kind::Push:
            s.mem.push(t->loc, t->a);
            s.term = t->b;
            return {StepResult::Next, Rule::Push};
        case Kind::Pop: {
            auto n = s.mem.pop(t->loc);
            if (!n) return {StepResult::Stuck, {}, StuckReason::EmptyPop};
            try {
                s.term = substitute(*n, t->name, t->b);
            } catch (const TermTooLarge&) {
                s.mem.push(t->loc, *n);  // leave the state untouched
                throw;
            }
            return {StepResult::Next, Rule::Pop};
        }
        case Kind::Choice: {
            if (s.cont.empty()) return {StepResult::Final};
            auto frame = std::move(s.cont.back());
            s.cont.pop_back();
            if (frame.label == t->label) {
                s.term = std::move(frame.term);
                return {StepResult::Next, Rule::Select};
            }
            return {StepResult::Next, Rule::Skip};
        }
        case Kind::Case:
            s.cont.push_back({t->label, t->b});
            s.term = t->a;
            return {StepResult::Next, Rule::Case};
        case Kind::Loop:
            s.cont.push_back({t->label, t});
            s.term = t->a;
            return {StepResult::Next, Rule::Loop};
    }
    return {StepResult::Stuck};
}

std::size_t default_fuel() {
    if (const char* e = std::getenv("FMC_FUEL")) {
        char* end = nullptr;
        auto v = std::strtoull(e, &end, 10);
        if (end && *end == '\0' && end != e) return static_cast<std::size_t>(v);
    }
    return 10000;
}

RunResult run_state(State s, std::size_t fuel, Trace* trace) {
    std::size_t steps = 0, pops = 0;
    for (;;) {
        if (s.term->kind == Kind::Choice && s.cont.empty()) {
            ChoiceLabel c = s.term->label;
            return {RunResult::Final, std::move(s), c, steps, pops};
        }
        if (steps >= fuel) return {RunResult::FuelExhausted, std::move(s), {}, steps, pops};
        StepResult r;
        try {
            r = step(s);
        } catch (const TermTooLarge&) {
            return {RunResult::FuelExhausted, std::move(s), {}, steps, pops};
        }
        if (r.kind == StepResult::Stuck) {
            RunResult out{RunResult::Stuck, std::move(s), {}, steps, pops};
            out.reason = r.reason;
            return out;
        }
        ++steps;
        if (r.rule == Rule::Pop) ++pops;
        if (trace) trace->push_back({steps, r.rule, s.mem, s.term, s.cont.size()});
    }
}

RunResult run(const Term& t, const Memory& init, std::size_t fuel, Trace* trace) {
    return run_state(State{init, t, {}}, fuel, trace);
}

Term readback(const State& s) {
    Term t = s.term;
    for (auto it = s.cont.rbegin(); it != s.cont.rend(); ++it) t = kase(t, it->label, it->term);
    for (auto loc = s.mem.stacks.rbegin(); loc != s.mem.stacks.rend(); ++loc)
        for (auto it = loc->second.rbegin(); it != loc->second.rend(); ++it) t = push(*it, loc->first, t);
    return t;
}

std::string trace_text(const Trace& tr) {
    std::ostringstream os;
    for (const auto& r : tr)
        os << r.step << ' ' << rule_name(r.rule) << "  mem: " << print_memory(r.mem) << "  term: " << print(r.term)
           << "  depth: " << r.depth << '\n';
    return os.str();
}

std::string trace_json(const Trace& tr) {
    auto arr = nlohmann::json::array();
    for (const auto& r : tr) {
        nlohmann::json mem = nlohmann::json::object();
        for (const auto& [loc, st] : r.mem.stacks) {
            auto items = nlohmann::json::array();
            for (const auto& t : st) items.push_back(print(t));
            mem[display(loc)] = items;
        }
        arr.push_back({{"step", r.step},
                       {"rule", rule_name(r.rule)},
                       {"memory", mem},
                       {"term", print(r.term)},
                       {"depth", r.depth}});
    }
    return arr.dump();
}

}  // namespace fmc
