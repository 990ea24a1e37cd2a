#pragma once

#include <map>
#include <memory>
#include <vector>

#include "fmc/label.hpp"

namespace fmc {

struct ValueType;

// Bottom-to-top: back() is the top of the stack.
using StackType = std::vector<ValueType>;

struct MemType {
    std::map<Location, StackType> at;  // canonical: no empty stacks

    bool empty() const { return at.empty(); }
    const StackType& get(const Location& l) const;
    void set(const Location& l, StackType s);
    bool operator==(const MemType& o) const;
};

// An empty SumType is the void type 0.
struct SumType {
    std::map<ChoiceLabel, MemType> branch;

    bool empty() const { return branch.empty(); }
    bool has(const ChoiceLabel& c) const { return branch.count(c) != 0; }
    bool operator==(const SumType& o) const;
};

struct ValueType {
    MemType in;
    SumType out;

    bool operator==(const ValueType& o) const { return in == o.in && out == o.out; }
};

inline bool MemType::operator==(const MemType& o) const { return at == o.at; }
inline bool SumType::operator==(const SumType& o) const { return branch == o.branch; }

// e => e.i
ValueType choice_type(const ChoiceLabel& i);
// Singleton memory type a(s)
MemType singleton(const Location& a, StackType s);

using TypePtr = std::shared_ptr<const ValueType>;

}  // namespace fmc
