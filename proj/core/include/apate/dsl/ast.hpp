#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "apate/engine.hpp"
#include "apate/value.hpp"

namespace apate::dsl {

/// `name(arg; arg; ...)`. Arguments are integer or string literals.
struct Invocation {
    std::string callee;
    std::vector<Value> args;
    SourceSpan span;

    friend bool operator==(const Invocation&, const Invocation&) = default;
};

/// Boolean expression over invocations. Binary nodes own exactly two
/// children; grouping parentheses are not recorded.
struct CondExpr {
    enum class Kind : std::uint8_t { leaf, and_op, or_op };

    Kind kind = Kind::leaf;
    Invocation leaf;
    std::vector<CondExpr> children;
    SourceSpan span;

    friend bool operator==(const CondExpr&, const CondExpr&) = default;
};

struct NameRef {
    std::string name;
    SourceSpan span;

    friend bool operator==(const NameRef&, const NameRef&) = default;
};

/// `guard -> action, action`; the guard is a name or an inline `{condexpr}`.
struct RuleExpr {
    std::variant<NameRef, CondExpr> guard;
    std::vector<Invocation> actions;
    SourceSpan span;

    friend bool operator==(const RuleExpr&, const RuleExpr&) = default;
};

struct ChainItem {
    std::string rule;
    bool exit = false;
    SourceSpan span;

    friend bool operator==(const ChainItem&, const ChainItem&) = default;
};

struct ChainExpr {
    std::vector<ChainItem> items;
    SourceSpan span;

    friend bool operator==(const ChainExpr&, const ChainExpr&) = default;
};

enum class DeclType : std::uint8_t { condition, rule, action, conditionblock, rulechain, syscall };

std::string_view decl_type_name(DeclType type);

struct Define {
    std::vector<std::string> names;
    DeclType type = DeclType::condition;
    SourceSpan span;

    friend bool operator==(const Define&, const Define&) = default;
};

using Rhs = std::variant<NameRef, Invocation, CondExpr, RuleExpr, ChainExpr>;

struct Let {
    std::string name;
    Rhs value;
    SourceSpan span;

    friend bool operator==(const Let&, const Let&) = default;
};

struct Bind {
    std::string chain;
    std::string syscall;
    SourceSpan span;

    friend bool operator==(const Bind&, const Bind&) = default;
};

using Statement = std::variant<Define, Let, Bind>;

struct Ast {
    std::vector<Statement> statements;

    friend bool operator==(const Ast&, const Ast&) = default;
};

} // namespace apate::dsl
