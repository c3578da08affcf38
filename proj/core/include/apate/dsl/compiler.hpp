#pragma once

#include <map>
#include <string>
#include <vector>

#include "apate/dsl/ast.hpp"
#include "apate/dsl/diagnostic.hpp"
#include "apate/dsl/lexer.hpp"
#include "apate/program.hpp"

namespace apate::dsl {

/// A let-bound builtin with the literals it was partially applied to.
struct BoundBuiltin {
    std::string builtin;
    std::vector<Value> args;
};

/// Result of semantic analysis: every name resolved to its final meaning.
struct TypedProgram {
    std::map<std::string, BoundBuiltin, std::less<>> conditions;
    std::map<std::string, BoundBuiltin, std::less<>> actions;
    std::map<std::string, CondExpr, std::less<>> blocks;
    std::map<std::string, RuleExpr, std::less<>> rules;
    std::map<std::string, ChainExpr, std::less<>> chains;
    std::map<Syscall, std::string> binds; // syscall -> chain name
    std::map<Syscall, SourceSpan> bind_spans;
    std::vector<Warning> warnings;
};

/// Name resolution, type checks, builtin arity/literal checks, duplicate
/// binds and block-before-call_orig contradictions. Throws DslError.
TypedProgram analyze(const Ast& ast);

/// Lowers conditions to blocks (a single condition becomes cb(c, c*, 2)) and
/// emits canonical tables. Deterministic.
RuleProgram compile(const TypedProgram& typed);

/// Lowers one guard expression.
ConditionBlock lower_guard(const CondExpr& expr, const TypedProgram& typed);

struct CompileOutput {
    RuleProgram program;
    std::vector<Warning> warnings;
};

/// tokenize -> parse -> analyze -> compile.
CompileOutput compile_source(const SourceUnit& source);

} // namespace apate::dsl
