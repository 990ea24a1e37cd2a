#include <vector>

#include "fmc/eval.hpp"
#include "fmc/types.hpp"

namespace fmc {

namespace {

// A premise still to be discharged once the current subterm yields a choice.
struct Pending {
    enum Kind { CaseBody, LoopBody } kind;
    ChoiceLabel label;
    Term rest;  // handler, or the loop itself
};

}  // namespace

EvalResult eval_big(const Term& t, const Memory& init, std::size_t fuel) {
    Memory mem = init;
    Term cur = t;
    std::vector<Pending> todo;
    std::size_t steps = 0;
    for (;;) {
        if (cur->kind == Kind::Choice && todo.empty()) return {EvalResult::Value, std::move(mem), cur->label, {}, steps};
        if (steps >= fuel) return {EvalResult::Diverged, std::move(mem), {}, {}, steps};
        switch (cur->kind) {
            case Kind::Var: return {EvalResult::Failed, std::move(mem), {}, StuckReason::FreeVariable, steps};
            case Kind::Choice: {
                // Result i of a case or loop body: taken when labels agree, skipped otherwise.
                Pending p = std::move(todo.back());
                todo.pop_back();
                if (p.label == cur->label) cur = std::move(p.rest);
                break;
            }
            case Kind::Push:
                mem.push(cur->loc, cur->a);
                cur = cur->b;
                break;
            case Kind::Pop: {
                auto n = mem.pop(cur->loc);
                if (!n) return {EvalResult::Failed, std::move(mem), {}, StuckReason::EmptyPop, steps};
                try {
                    cur = substitute(*n, cur->name, cur->b);
                } catch (const TermTooLarge&) {
                    return {EvalResult::Diverged, std::move(mem), {}, {}, steps};
                }
                break;
            }
            case Kind::Case:
                todo.push_back({Pending::CaseBody, cur->label, cur->b});
                cur = cur->a;
                break;
            case Kind::Loop:
                todo.push_back({Pending::LoopBody, cur->label, cur});
                cur = cur->a;
                break;
        }
        ++steps;
    }
}

namespace {

struct MFrame {
    enum Kind { Handler, Loop, ResumeTerm, ResumeChoice } kind;
    ChoiceLabel label;
    Term term;
    Memory saved;
};

}  // namespace

MeasuredOutcome eval_measured(const Term& t, const Memory& init, std::size_t fuel) {
    Memory mem = init;
    Term cur = t;
    std::vector<MFrame> todo;
    std::size_t steps = 0, n = 0;
    // Without a synthesized input type, the memory is filled on demand (see Pop).
    auto zero_for = [](const Term& u) {
        try {
            return zero_memory(synthesize({}, u).in);
        } catch (const TypeError&) {
            return Memory{};
        }
    };
    // Number of discarded subevaluations in progress.
    std::size_t aux = 0;
    try {
        for (;;) {
            if (steps >= fuel) return {std::nullopt, "fuel exhausted"};
            ++steps;
            switch (cur->kind) {
                case Kind::Var: return {std::nullopt, "free variable " + cur->name};
                case Kind::Choice: {
                    if (todo.empty()) return {MeasuredResult{std::move(mem), cur->label, n}, {}};
                    MFrame f = std::move(todo.back());
                    todo.pop_back();
                    switch (f.kind) {
                        case MFrame::Handler:
                            if (f.label == cur->label) {
                                cur = std::move(f.term);
                            } else {
                                // Discarded handler is measured on a zero memory.
                                todo.push_back({MFrame::ResumeChoice, cur->label, nullptr, std::move(mem)});
                                ++aux;
                                mem = zero_for(f.term);
                                cur = std::move(f.term);
                            }
                            break;
                        case MFrame::Loop:
                            if (f.label == cur->label) cur = std::move(f.term);
                            break;
                        case MFrame::ResumeTerm:
                            --aux;
                            mem = std::move(f.saved);
                            cur = std::move(f.term);
                            break;
                        case MFrame::ResumeChoice:
                            --aux;
                            mem = std::move(f.saved);
                            cur = choice(f.label);
                            break;
                    }
                    break;
                }
                case Kind::Push: {
                    Memory after = std::move(mem);
                    after.push(cur->loc, cur->a);
                    todo.push_back({MFrame::ResumeTerm, {}, cur->b, std::move(after)});
                    ++aux;
                    mem = zero_for(cur->a);
                    cur = cur->a;
                    break;
                }
                case Kind::Pop: {
                    auto v = mem.pop(cur->loc);
                    if (!v && aux > 0) v = cur->annot ? inhabit(*cur->annot) : choice(ChoiceLabel::star());
                    if (!v) return {std::nullopt, "pop on empty stack at " + display(cur->loc)};
                    ++n;
                    cur = substitute(*v, cur->name, cur->b);
                    break;
                }
                case Kind::Case:
                    todo.push_back({MFrame::Handler, cur->label, cur->b, {}});
                    cur = cur->a;
                    break;
                case Kind::Loop:
                    return {std::nullopt, "measured evaluation is defined for loop-free terms only"};
            }
        }
    } catch (const TypeError& e) {
        return {std::nullopt, std::string("type synthesis failed: ") + e.what()};
    } catch (const TermTooLarge& e) {
        return {std::nullopt, e.what()};
    }
}

}  // namespace fmc
