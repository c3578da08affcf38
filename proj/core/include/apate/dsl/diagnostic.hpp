#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "apate/engine.hpp"

namespace apate::dsl {

enum class ErrorKind {
    unterminated_string,
    illegal_character,
    syntax_error,
    undefined_name,
    redefinition,
    type_mismatch,
    unknown_builtin,
    unknown_syscall,
    arity_error,
    invalid_literal,
    duplicate_bind,
    cyclic_definition,
    contradiction,
};

std::string_view error_kind_name(ErrorKind kind);

/// A compile error pinned to a source position. what() is "line:col: msg".
class DslError : public std::runtime_error {
public:
    DslError(ErrorKind kind, SourceSpan span, const std::string& message);

    ErrorKind kind() const { return kind_; }
    SourceSpan span() const { return span_; }
    const std::string& message() const { return message_; }

private:
    ErrorKind kind_;
    SourceSpan span_;
    std::string message_;
};

struct Warning {
    SourceSpan span;
    std::string message;
};

} // namespace apate::dsl
