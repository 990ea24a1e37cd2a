#pragma once

#include <optional>
#include <string>

#include "fmc/machine.hpp"

namespace fmc {

struct EvalResult {
    enum Kind { Value, Diverged, Failed } kind;
    Memory mem;
    ChoiceLabel choice;
    StuckReason reason{};
    std::size_t steps = 0;  // rule applications, counted like machine transitions
};

// Big-step evaluation driven by an explicit stack of pending premises, so the
// native call stack stays flat whatever the derivation depth.
EvalResult eval_big(const Term& t, const Memory& init, std::size_t fuel);

struct MeasuredResult {
    Memory mem;
    ChoiceLabel choice;
    std::size_t n = 0;
};

struct MeasuredOutcome {
    std::optional<MeasuredResult> value;
    std::string error;  // set when value is empty
};

// Pushed arguments and skipped handlers are also evaluated, each on the zero
// memory of its synthesized input type; their pop counts add to n. Inside such
// a subevaluation a pop on an empty stack takes the zero value of its
// annotation, or * when unannotated, which covers subterms whose input type
// cannot be synthesized. The main run never guesses: an empty pop there is an
// error.
MeasuredOutcome eval_measured(const Term& t, const Memory& init, std::size_t fuel);

}  // namespace fmc
