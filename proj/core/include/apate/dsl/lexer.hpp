#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "apate/dsl/diagnostic.hpp"

namespace apate::dsl {

struct SourceUnit {
    std::string text;
    std::string filename = "<input>";
};

enum class TokenKind : std::uint8_t {
    kw_define,
    kw_as,
    kw_let,
    kw_be,
    kw_bind,
    kw_to,
    identifier,
    string,
    integer,
    lbrace,
    rbrace,
    lparen,
    rparen,
    comma,
    semicolon,
    colon,
    arrow,
    and_and,
    or_or,
    end,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text; // identifier name or decoded string literal
    std::int64_t number = 0;
    SourceSpan span;

    friend bool operator==(const Token&, const Token&) = default;
};

/// Always ends with an `end` token. Throws DslError.
std::vector<Token> tokenize(const SourceUnit& source);

} // namespace apate::dsl
