#include "apate/engine.hpp"

#include <algorithm>
#include <limits>

#include "apate/program.hpp"

namespace apate {

Condition Condition::make(std::string_view builtin, std::vector<Value> params) {
    auto prepared = prepare_condition(builtin, params);
    return Condition{std::string(builtin), std::move(params), std::move(prepared)};
}

Condition Condition::always_true() { return make("always_true"); }

Action Action::make(std::string_view builtin, std::vector<Value> params) {
    auto prepared = prepare_action(builtin, params);
    return Action{std::string(builtin), std::move(params), std::move(prepared)};
}

ConditionBlock::ConditionBlock(Operand left, Operand right, BlockOp op) {
    const auto left_depth = std::holds_alternative<ConditionBlock>(left) ? std::get<ConditionBlock>(left).depth_ : 1;
    const auto right_depth =
        std::holds_alternative<ConditionBlock>(right) ? std::get<ConditionBlock>(right).depth_ : 1;
    append(std::move(left));
    append(std::move(right));
    steps_.push_back(Step{Step::Kind::combine, op, 0});
    depth_ = std::max(left_depth, right_depth + 1);
    assemble();
}

namespace {

using Instr = ConditionBlock::Instr;

// x <cmp> n as (x in [lo, hi]) != invert.
Instr range_instr(CtxField field, CmpOp cmp, std::int64_t n) {
    constexpr auto kMin = std::numeric_limits<std::int64_t>::min();
    constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
    std::int64_t lo = kMin;
    std::int64_t hi = kMax;
    bool invert = false;
    switch (cmp) {
    case CmpOp::eq: lo = n; hi = n; break;
    case CmpOp::ne: lo = n; hi = n; invert = true; break;
    case CmpOp::ge: lo = n; break;
    case CmpOp::le: hi = n; break;
    // x > max and x < min never hold: the full range, inverted.
    case CmpOp::gt: n == kMax ? void(invert = true) : void(lo = n + 1); break;
    case CmpOp::lt: n == kMin ? void(invert = true) : void(hi = n - 1); break;
    }
    Instr in{Instr::Code::ctx_range};
    in.field = static_cast<std::uint8_t>(field);
    in.invert = invert ? 1 : 0;
    in.lo = lo;
    in.span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    return in;
}

// On 0/1 operands cb(d, e, f) agrees with d & e when f = 2 and d | e when
// f = 4, so the evaluator uses (d & e) | ((d | e) & combine(1, 0, f)).
constexpr std::uint8_t combine_flag(BlockOp op) { return static_cast<std::uint8_t>(combine(1, 0, op)); }

static_assert([] {
    for (auto op : {BlockOp::and_op, BlockOp::or_op}) {
        for (int d = 0; d <= 1; ++d) {
            for (int e = 0; e <= 1; ++e) {
                if (((d & e) | ((d | e) & combine_flag(op))) != combine(d, e, op)) {
                    return false;
                }
            }
        }
    }
    return true;
}());

} // namespace

void ConditionBlock::assemble() {
    code_.clear();
    code_.reserve(steps_.size());
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        const auto& step = steps_[i];
        if (step.kind == Step::Kind::combine) {
            Instr in{Instr::Code::combine};
            in.any = combine_flag(step.op);
            code_.push_back(in);
            continue;
        }
        const auto& p = leaves_[step.leaf].prepared;
        Instr in{Instr::Code::general};
        switch (p.op) {
        case CondOp::always_true:
            in = range_instr(CtxField::pid, CmpOp::ge, std::numeric_limits<std::int64_t>::min());
            break;
        case CondOp::uid_cmp: in = range_instr(CtxField::uid, p.cmp, p.number); break;
        case CondOp::ctx_cmp: in = range_instr(p.field, p.cmp, p.number); break;
        default: in.leaf = step.leaf; break;
        }
        // A leaf directly followed by a combine is that combine's right operand.
        if (i + 1 < steps_.size() && steps_[i + 1].kind == Step::Kind::combine) {
            in.code = in.code == Instr::Code::general ? Instr::Code::general_combine : Instr::Code::ctx_range_combine;
            in.any = combine_flag(steps_[i + 1].op);
            ++i;
        }
        code_.push_back(in);
    }

    std::vector<Instr> runs;
    runs.reserve(code_.size() + code_.size() / 2);
    for (std::size_t i = 0; i < code_.size();) {
        std::size_t j = i;
        while (j < code_.size() && code_[j].code == Instr::Code::ctx_range_combine) {
            ++j;
        }
        if (j - i >= 2) {
            Instr head{Instr::Code::ctx_run};
            head.leaf = static_cast<std::uint32_t>(j - i);
            runs.push_back(head);
            runs.insert(runs.end(), code_.begin() + static_cast<std::ptrdiff_t>(i),
                        code_.begin() + static_cast<std::ptrdiff_t>(j));
            i = j;
        } else {
            runs.push_back(code_[i++]);
        }
    }
    code_ = std::move(runs);
}

ConditionBlock ConditionBlock::neutral(Condition c) {
    return ConditionBlock(std::move(c), Condition::always_true(), BlockOp::and_op);
}

void ConditionBlock::append(Operand operand) {
    if (auto* c = std::get_if<Condition>(&operand)) {
        steps_.push_back(Step{Step::Kind::leaf, BlockOp::and_op, static_cast<std::uint32_t>(leaves_.size())});
        leaves_.push_back(std::move(*c));
        return;
    }
    auto& block = std::get<ConditionBlock>(operand);
    const auto offset = static_cast<std::uint32_t>(leaves_.size());
    for (auto step : block.steps_) {
        if (step.kind == Step::Kind::leaf) {
            step.leaf += offset;
        }
        steps_.push_back(step);
    }
    std::move(block.leaves_.begin(), block.leaves_.end(), std::back_inserter(leaves_));
}

int eval_condition(const Condition& c, EvalContext& ctx) {
    ++ctx.conditions_evaluated;
    return evaluate(c.prepared, ctx) ? 1 : 0;
}

int eval_condition(const Condition& c, const SyscallEvent& ev, SandboxState& sandbox) {
    SyscallEvent copy = ev;
    EvalContext ctx(copy, sandbox);
    return eval_condition(c, ctx);
}

int eval_condition_block(const ConditionBlock& cb, EvalContext& ctx) {
    // The top of the stack lives in `acc`; `stack` holds the values beneath it.
    constexpr std::size_t kInline = 32;
    std::uint8_t inline_stack[kInline] = {};
    std::vector<std::uint8_t> heap_stack;
    std::uint8_t* stack = inline_stack;
    if (cb.max_depth() + 1 > kInline) {
        heap_stack.resize(cb.max_depth() + 1);
        stack = heap_stack.data();
    }
    std::size_t below = 0;
    int acc = 0;
    std::uint64_t evaluated = 0;
    const auto leaves = cb.leaves();
    const auto& task = ctx.event.ctx;
    const std::int64_t fields[] = {task.pid, task.uid, task.ssid};
    auto range = [&fields](const ConditionBlock::Instr& in) {
        const auto offset = static_cast<std::uint64_t>(fields[in.field]) - static_cast<std::uint64_t>(in.lo);
        return static_cast<int>(offset <= in.span) ^ in.invert;
    };
    const auto code = cb.code();
    for (const auto* ip = code.data(), *end = code.data() + code.size(); ip != end; ++ip) {
        using Code = ConditionBlock::Instr::Code;
        const auto& in = *ip;
        switch (in.code) {
        case Code::ctx_range:
            ++evaluated;
            stack[below++] = static_cast<std::uint8_t>(acc);
            acc = range(in);
            break;
        case Code::general:
            ++evaluated;
            stack[below++] = static_cast<std::uint8_t>(acc);
            acc = evaluate(leaves[in.leaf].prepared, ctx) ? 1 : 0;
            break;
        case Code::combine: {
            const int d = stack[--below];
            acc = (d & acc) | ((d | acc) & in.any);
            break;
        }
        case Code::ctx_range_combine: {
            ++evaluated;
            const int e = range(in);
            acc = (acc & e) | ((acc | e) & in.any);
            break;
        }
        case Code::general_combine: {
            ++evaluated;
            const int e = evaluate(leaves[in.leaf].prepared, ctx) ? 1 : 0;
            acc = (acc & e) | ((acc | e) & in.any);
            break;
        }
        case Code::ctx_run: {
            const auto* run = ip + 1;
            for (std::uint32_t k = 0; k < in.leaf; ++k) {
                const int e = range(run[k]);
                acc = (acc & e) | ((acc | e) & run[k].any);
            }
            evaluated += in.leaf;
            ip += in.leaf;
            break;
        }
        }
    }
    ctx.conditions_evaluated += evaluated;
    return acc;
}

int eval_condition_block(const ConditionBlock& cb, const SyscallEvent& ev, SandboxState& sandbox) {
    SyscallEvent copy = ev;
    EvalContext ctx(copy, sandbox);
    return eval_condition_block(cb, ctx);
}

ChainOutcome run_action_chain(const ActionChain& chain, EvalContext& ctx) {
    for (std::size_t k = 0; k < chain.actions.size(); ++k) {
        const int status = execute(chain.actions[k].prepared, ctx);
        if (status != 0) {
            // error routine
            ctx.diagnostics.push_back("ActionFailed(" + std::to_string(k + 1) + ", " + std::to_string(status) +
                                      "): " + chain.actions[k].builtin);
            ctx.blocked = true;
            ctx.jump_target.reset();
            ctx.result = default_error(ctx.event.syscall, ctx.event.ctx);
            return ChainOutcome{status, k + 1};
        }
    }
    return ChainOutcome{};
}

namespace {

Disposition finish(EvalContext& ctx, Disposition d) {
    if (!ctx.blocked && !ctx.called_orig) {
        ctx.result = exec_syscall(ctx.sandbox, ctx.event, &ctx.output);
        ctx.called_orig = true;
    }
    d.seq = ctx.event.seq;
    d.syscall = ctx.event.syscall;
    d.result = ctx.result;
    d.blocked = ctx.blocked;
    d.original_executed = ctx.called_orig;
    d.manipulated_args = std::move(ctx.event.args);
    d.conditions_evaluated = ctx.conditions_evaluated;
    d.log_records = ctx.log_records;
    d.emergency_exit = ctx.emergency;
    d.output = std::move(ctx.output);
    d.diagnostics = std::move(ctx.diagnostics);
    return d;
}

} // namespace

Disposition eval_chain(const RuleChain& chain, SyscallEvent ev, SandboxState& sandbox, const EngineOptions& options) {
    EvalContext ctx(ev, sandbox);
    ctx.chain_length = chain.rules.size();
    Disposition d;
    std::size_t idx = 0;
    while (idx < chain.rules.size()) {
        if (d.steps == options.step_budget) {
            d.budget_exhausted = true;
            ctx.blocked = true;
            ctx.result = default_error(ev.syscall, ev.ctx);
            ctx.diagnostics.push_back("BudgetExhausted: " + std::to_string(options.step_budget) +
                                      " traversal steps");
            break;
        }
        ++d.steps;
        const Rule& rule = chain.rules[idx];
        if (eval_condition_block(rule.guard, ctx) == 0) {
            ++idx;
            continue;
        }
        d.matched_rules.push_back(idx);
        ctx.jump_target.reset();
        const auto outcome = run_action_chain(rule.actions, ctx);
        if (outcome.status != 0) {
            d.failure = ActionFailure{idx, outcome.failed_index, outcome.status};
            break;
        }
        if (rule.exit || ctx.emergency) {
            break;
        }
        idx = ctx.jump_target.value_or(idx + 1);
    }
    return finish(ctx, std::move(d));
}

Disposition pass_through(SyscallEvent ev, SandboxState& sandbox) {
    EvalContext ctx(ev, sandbox);
    return finish(ctx, Disposition{});
}

Disposition dispatch(const RuleProgram& program, SyscallEvent ev, SandboxState& sandbox,
                     const EngineOptions& options) {
    if (const auto* chain = program.chain_for(ev.syscall)) {
        return eval_chain(*chain, std::move(ev), sandbox, options);
    }
    return pass_through(std::move(ev), sandbox);
}

} // namespace apate
