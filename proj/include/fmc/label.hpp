#pragma once

#include <compare>
#include <string>

namespace fmc {

using Identifier = std::string;

bool valid_identifier(const std::string& s);

// Location and choice share one shape: an empty name is the distinguished
// default (lambda for locations, star for choices). Empty sorts first, which
// gives the fixed "default first, then lexicographic" order used everywhere.
struct Location {
    std::string name;

    Location() = default;
    explicit Location(std::string n) : name(std::move(n)) {}
    static Location deflt() { return Location(); }
    bool is_default() const { return name.empty(); }
    auto operator<=>(const Location&) const = default;
};

struct ChoiceLabel {
    std::string name;

    ChoiceLabel() = default;
    explicit ChoiceLabel(std::string n) : name(std::move(n)) {}
    static ChoiceLabel star() { return ChoiceLabel(); }
    bool is_star() const { return name.empty(); }
    auto operator<=>(const ChoiceLabel&) const = default;
};

// Concrete spellings: '*' or '\'name for choices, "" or name for locations.
std::string to_string(const ChoiceLabel& c);
std::string to_string(const Location& l);
// Spelling used in memory dumps, where the default location needs a glyph.
std::string display(const Location& l);

}  // namespace fmc
