#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "apate/builtins.hpp"
#include "apate/event.hpp"
#include "apate/sandbox.hpp"

namespace apate {

struct SourceSpan {
    std::uint32_t line = 0;
    std::uint32_t column = 0;

    // Spans are source positions, not structure: two nodes parsed from different
    // positions still compare equal.
    friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }
};

/// c(a, b): a registered builtin applied to literal parameters.
struct Condition {
    std::string builtin;
    std::vector<Value> params;
    PreparedCondition prepared;

    /// Throws BuiltinError on unknown names, non-conditions or bad literals.
    static Condition make(std::string_view builtin, std::vector<Value> params = {});
    /// The neutral condition c*.
    static Condition always_true();

    bool is_always_true() const { return prepared.op == CondOp::always_true; }
    ParamSource param_source() const { return prepared.source(); }

    friend bool operator==(const Condition& a, const Condition& b) {
        return a.builtin == b.builtin && a.params == b.params;
    }
};

/// Operator code of a condition block: 2 combines with AND, 4 with OR.
enum class BlockOp : std::uint8_t { and_op = 2, or_op = 4 };

inline constexpr int op_code(BlockOp op) { return static_cast<int>(op); }

/// cb(d, e, f) = 1 iff (d + e) * f >= 4.
inline constexpr int combine(int d, int e, BlockOp f) { return (d + e) * op_code(f) >= 4 ? 1 : 0; }

class ConditionBlock;
using Operand = std::variant<Condition, ConditionBlock>;

/// Binary tree over conditions, stored as a postfix program so evaluation is
/// a single forward pass.
class ConditionBlock {
public:
    struct Step {
        enum class Kind : std::uint8_t { leaf, combine } kind;
        BlockOp op = BlockOp::and_op;
        std::uint32_t leaf = 0;

        friend bool operator==(const Step&, const Step&) = default;
    };

    ConditionBlock(Operand left, Operand right, BlockOp op);

    /// cb(c, c*, 2): embeds a single condition.
    static ConditionBlock neutral(Condition c);

    std::span<const Step> steps() const { return steps_; }
    std::span<const Condition> leaves() const { return leaves_; }
    BlockOp root_op() const { return steps_.back().op; }
    /// Largest number of pending operands during evaluation.
    std::size_t max_depth() const { return depth_; }

    /// Evaluation form of steps(). Integer comparisons on the task context
    /// become a range test; every other leaf defers to its prepared condition.
    struct Instr {
        // The *_combine forms evaluate a leaf and immediately combine it, as
        // the right operand, with the value on top of the stack.
        // ctx_run heads `leaf` consecutive ctx_range_combine instructions.
        enum class Code : std::uint8_t {
            ctx_range,
            general,
            combine,
            ctx_range_combine,
            general_combine,
            ctx_run,
        } code;
        std::uint8_t any = 0;     // combining forms: combine(1, 0, f), i.e. 1 for OR, 0 for AND
        std::uint8_t invert = 0;  // ctx_range: result is negated
        std::uint8_t field = 0;   // ctx_range: index into (pid, uid, ssid)
        std::uint32_t leaf = 0;   // general: index into leaves(); ctx_run: run length
        std::int64_t lo = 0;      // ctx_range: field in [lo, lo + span]
        std::uint64_t span = 0;
    };

    std::span<const Instr> code() const { return code_; }

    friend bool operator==(const ConditionBlock& a, const ConditionBlock& b) {
        return a.steps_ == b.steps_ && a.leaves_ == b.leaves_;
    }

private:
    void append(Operand operand);
    void assemble();

    std::vector<Step> steps_;
    std::vector<Condition> leaves_;
    std::vector<Instr> code_;
    std::size_t depth_ = 0;
};

struct Action {
    std::string builtin;
    std::vector<Value> params;
    PreparedAction prepared;

    static Action make(std::string_view builtin, std::vector<Value> params = {});

    friend bool operator==(const Action& a, const Action& b) {
        return a.builtin == b.builtin && a.params == b.params;
    }
};

/// Ordered actions; the index of actions[k] is k + 1.
struct ActionChain {
    std::vector<Action> actions;

    friend bool operator==(const ActionChain&, const ActionChain&) = default;
};

/// r^{g,h} with its exit flag as placed in a chain.
struct Rule {
    std::string name;
    ConditionBlock guard;
    ActionChain actions;
    bool exit = false;
    SourceSpan span;

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleChain {
    std::string name;
    std::vector<Rule> rules;

    friend bool operator==(const RuleChain&, const RuleChain&) = default;
};

struct ActionFailure {
    std::size_t rule = 0;
    std::size_t action_index = 0; // 1-based
    int status = 0;
};

/// What happened to one event.
struct Disposition {
    std::uint64_t seq = 0;
    Syscall syscall = Syscall::getpid;
    std::vector<std::size_t> matched_rules;
    std::int64_t result = 0;
    bool blocked = false;
    bool original_executed = false;
    std::vector<Value> manipulated_args;
    std::uint64_t conditions_evaluated = 0;
    std::uint64_t steps = 0;
    std::uint64_t log_records = 0;
    std::optional<ActionFailure> failure;
    bool budget_exhausted = false;
    bool emergency_exit = false;
    SyscallOutput output;
    std::vector<std::string> diagnostics;
};

struct EngineOptions {
    std::size_t step_budget = 10000;
};

int eval_condition(const Condition& c, EvalContext& ctx);
int eval_condition(const Condition& c, const SyscallEvent& ev, SandboxState& sandbox);

/// Evaluates both children of every block; no short-circuit.
int eval_condition_block(const ConditionBlock& cb, EvalContext& ctx);
int eval_condition_block(const ConditionBlock& cb, const SyscallEvent& ev, SandboxState& sandbox);

struct ChainOutcome {
    int status = 0;
    std::size_t failed_index = 0; // 1-based; 0 when the chain succeeded
};

/// Runs actions in order. The first nonzero status stops the chain, runs the
/// error routine once and sets the result slot to the syscall's error.
ChainOutcome run_action_chain(const ActionChain& chain, EvalContext& ctx);

Disposition eval_chain(const RuleChain& chain, SyscallEvent ev, SandboxState& sandbox,
                       const EngineOptions& options = {});

/// Runs the original syscall with no rule involvement.
Disposition pass_through(SyscallEvent ev, SandboxState& sandbox);

class RuleProgram;

Disposition dispatch(const RuleProgram& program, SyscallEvent ev, SandboxState& sandbox,
                     const EngineOptions& options = {});

} // namespace apate
