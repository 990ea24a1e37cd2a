#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

struct GenConfig {
    std::uint64_t seed = 1;
    std::size_t max_size = 30;
    std::size_t locations = 3;  // λ, a, b, c, ...
    std::size_t choices = 4;    // ⋆, 'i, 'j, 'k, ...
    double loop_prob = 0.0;
    bool typed = false;
    bool allow_void = true;     // typed mode: void sums in binder annotations
    std::size_t type_depth = 2;
};

void validate(const GenConfig& cfg);

using Rng = std::mt19937_64;
Rng item_rng(std::uint64_t seed, std::uint64_t index);

Term gen_term(const GenConfig& cfg, Rng& rng);
Term gen_term(const GenConfig& cfg);
ValueType gen_type(const GenConfig& cfg, Rng& rng, std::size_t depth);
ValueType gen_type(const GenConfig& cfg);

enum class Outcome { Pass, Fail, Discard };

struct PropResult {
    Outcome outcome = Outcome::Pass;
    std::string detail;
};

using Property = std::function<PropResult(const Term&, Rng&)>;

struct SuiteReport {
    std::string name;
    std::size_t n = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t discarded = 0;
    std::optional<std::string> counterexample;
    std::string detail;
    bool ok() const { return failed == 0; }
};

std::vector<std::string> suite_names();
// Generator settings each suite is meant to run with.
GenConfig suite_config(const std::string& name, std::uint64_t seed);
// Per-term property of a suite; throws std::invalid_argument for unknown names
// and for "inhabitation", which ranges over types.
Property suite_property(const std::string& name);
PropResult inhabitation_property(const ValueType& t);

SuiteReport run_suite(const std::string& name, std::size_t n, const GenConfig& cfg);

// Greedy: repeatedly replaces t by a smaller closed subterm, or a subterm by
// a choice, while the property still fails.
Term shrink(const Term& t, const Property& p, std::uint64_t seed);

std::string report_text(const SuiteReport& r);
std::string report_json(const std::vector<SuiteReport>& rs);

}  // namespace fmc
