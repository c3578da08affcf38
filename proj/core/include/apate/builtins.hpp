#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apate/event.hpp"
#include "apate/sandbox.hpp"
#include "apate/value.hpp"
#include "apate/wildcard.hpp"

namespace apate {

enum class CmpOp : std::uint8_t { eq, ne, gt, lt, ge, le };

std::optional<CmpOp> parse_cmp(std::string_view text);
std::string_view cmp_text(CmpOp op);

constexpr bool compare(std::int64_t lhs, CmpOp op, std::int64_t rhs) {
    switch (op) {
    case CmpOp::eq: return lhs == rhs;
    case CmpOp::ne: return lhs != rhs;
    case CmpOp::gt: return lhs > rhs;
    case CmpOp::lt: return lhs < rhs;
    case CmpOp::ge: return lhs >= rhs;
    case CmpOp::le: return lhs <= rhs;
    }
    return false;
}

enum class CtxField : std::uint8_t { pid, uid, ssid };

std::optional<CtxField> parse_ctx_field(std::string_view text);

enum class BuiltinKind : std::uint8_t { condition, action };

enum class ParamType : std::uint8_t {
    integer,
    string,
    pattern,    // string holding a WildcardPattern
    comparison, // one of == != > < >= <=
    ctx_field,  // "pid", "uid" or "ssid"
    literal,    // integer or string
};

struct ParamSpec {
    ParamType type;
    bool optional = false;
};

/// Registry entry: what the compiler checks invocations against.
struct BuiltinSpec {
    std::string_view name;
    BuiltinKind kind;
    std::vector<ParamSpec> params;
    std::string_view summary;

    std::size_t min_arity() const;
    std::size_t max_arity() const { return params.size(); }
};

std::span<const BuiltinSpec> builtin_registry();
const BuiltinSpec* find_builtin(std::string_view name);

class BuiltinError : public std::runtime_error {
public:
    enum class Kind { unknown_builtin, wrong_kind, arity, type_mismatch, bad_param };

    BuiltinError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Where a condition draws its decision parameter from.
enum class ParamSource : std::uint8_t { none, task_context, syscall_arg, reactive };

enum class CondOp : std::uint8_t {
    always_true,
    parent_pname,
    self_pname,
    param,
    path_param,
    fd_path,
    uid_cmp,
    ctx_cmp,
    file_keyword,
    store_cmp,
};

/// A condition with its literals decoded once at load time.
struct PreparedCondition {
    CondOp op = CondOp::always_true;
    CmpOp cmp = CmpOp::eq;
    CtxField field = CtxField::pid;
    std::size_t index = 0;
    std::int64_t number = 0;
    WildcardPattern pattern;
    std::string text;
    std::string text2;

    ParamSource source() const;
};

enum class ActOp : std::uint8_t {
    call_orig,
    log,
    block,
    manipulate_param,
    store_set,
    store_add,
    jump,
    hide_entry,
    emergency_exit,
};

struct PreparedAction {
    ActOp op = ActOp::call_orig;
    std::size_t index = 0;
    std::optional<std::int64_t> number;
    WildcardPattern pattern;
    std::string text;
    std::optional<std::string> string_value;
};

/// Checks arity and literal types against the registry and decodes the
/// literals. Throws BuiltinError.
PreparedCondition prepare_condition(std::string_view name, std::span<const Value> params);
PreparedAction prepare_action(std::string_view name, std::span<const Value> params);

/// Mutable state threaded through one event's rule traversal.
struct EvalContext {
    EvalContext(SyscallEvent& ev, SandboxState& sb) : event(ev), sandbox(sb) {}

    SyscallEvent& event;
    SandboxState& sandbox;
    std::int64_t result = 0;
    bool blocked = false;
    bool called_orig = false;
    bool emergency = false;
    SyscallOutput output;
    std::optional<std::size_t> jump_target;
    std::size_t chain_length = 0;
    std::uint64_t conditions_evaluated = 0;
    std::uint64_t log_records = 0;
    std::vector<std::string> diagnostics;
};

/// Condition body; does not touch the evaluation counter.
bool evaluate(const PreparedCondition& cond, EvalContext& ctx);

/// Action body; returns 0 on success, nonzero on failure.
int execute(const PreparedAction& action, EvalContext& ctx);

/// Prefix rewrite used by manipulateparam. Returns nullopt when `match`
/// does not apply. A doubled separator at the seam is collapsed.
std::optional<std::string> rewrite_prefix(std::string_view subject, const WildcardPattern& match,
                                          std::string_view replacement);

} // namespace apate
