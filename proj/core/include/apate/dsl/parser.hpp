#pragma once

#include <span>
#include <string>

#include "apate/dsl/ast.hpp"
#include "apate/dsl/lexer.hpp"

namespace apate::dsl {

/// Recursive descent over the token stream. Throws DslError (syntax_error).
Ast parse(std::span<const Token> tokens);

Ast parse_source(const SourceUnit& source);

/// Source text that parses back to a structurally equal Ast.
std::string pretty_print(const Ast& ast);
std::string pretty_print(const CondExpr& expr);

} // namespace apate::dsl
