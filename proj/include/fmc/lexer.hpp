#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

enum class Tok { Ident, Choice, Number, Sym, End };

struct Token {
    Tok kind;
    std::string text;  // for Choice: label name, empty for '*
    int line;
    int col;
};

// Shared by the core and surface parsers. Skips whitespace and `--` comments.
std::vector<Token> lex(std::string_view src);

class TokenStream {
public:
    explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek(std::size_t k = 0) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool is_sym(std::string_view s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Sym && peek(k).text == s;
    }
    bool is_ident(std::string_view s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Ident && peek(k).text == s;
    }
    bool accept(std::string_view s) {
        if (!is_sym(s)) return false;
        ++pos_;
        return true;
    }
    void expect(std::string_view s) {
        if (!accept(s)) fail("expected '" + std::string(s) + "'");
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", got " + got, t.line, t.col);
    }
    std::size_t pos() const { return pos_; }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// Type syntax over a token stream; used by term annotations and the surface parser.
ValueType parse_vtype(TokenStream& ts, const TypeNames& names);

}  // namespace fmc
