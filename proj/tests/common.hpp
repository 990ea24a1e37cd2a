#pragma once

#include <gtest/gtest.h>

#include <string>

#include "fmc/syntax.hpp"
#include "fmc/types.hpp"

namespace fmc::test {

inline Term P(const std::string& s) { return parse(s, standard_names()); }
inline ValueType T(const std::string& s) { return parse_type(s, standard_names()); }

inline ::testing::AssertionResult AlphaEq(const Term& a, const Term& b) {
    if (alpha_eq(a, b)) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << print(a) << " is not alpha-equal to " << print(b);
}

}  // namespace fmc::test
