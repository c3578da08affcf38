#pragma once

#include "apate/dsl/compiler.hpp"

namespace apate::dsl::detail {

/// Resolves an invocation's callee (a let-bound name first, then a registry
/// builtin) and appends the call's literals to the bound ones. Throws DslError.
BoundBuiltin resolve_invocation(const Invocation& inv, BuiltinKind kind, const TypedProgram& typed);

/// Maps a registry rejection onto the DSL error kinds.
[[noreturn]] void rethrow_builtin_error(const BuiltinError& e, SourceSpan span);

} // namespace apate::dsl::detail
