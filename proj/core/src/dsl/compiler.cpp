#include "apate/dsl/compiler.hpp"

#include "apate/dsl/parser.hpp"
#include "resolve.hpp"

namespace apate::dsl {

namespace {

Condition make_condition(const Invocation& inv, const TypedProgram& typed) {
    auto bound = detail::resolve_invocation(inv, BuiltinKind::condition, typed);
    try {
        return Condition::make(bound.builtin, std::move(bound.args));
    } catch (const BuiltinError& e) {
        detail::rethrow_builtin_error(e, inv.span);
    }
}

Operand lower_operand(const CondExpr& expr, const TypedProgram& typed) {
    if (expr.kind == CondExpr::Kind::leaf) {
        return make_condition(expr.leaf, typed);
    }
    return lower_guard(expr, typed);
}

ConditionBlock lower_named_guard(const NameRef& ref, const TypedProgram& typed) {
    if (auto it = typed.blocks.find(ref.name); it != typed.blocks.end()) {
        return lower_guard(it->second, typed);
    }
    return ConditionBlock::neutral(make_condition(Invocation{ref.name, {}, ref.span}, typed));
}

} // namespace

ConditionBlock lower_guard(const CondExpr& expr, const TypedProgram& typed) {
    if (expr.kind == CondExpr::Kind::leaf) {
        return ConditionBlock::neutral(make_condition(expr.leaf, typed));
    }
    const auto op = expr.kind == CondExpr::Kind::and_op ? BlockOp::and_op : BlockOp::or_op;
    return ConditionBlock(lower_operand(expr.children[0], typed), lower_operand(expr.children[1], typed), op);
}

RuleProgram compile(const TypedProgram& typed) {
    ProgramBuilder builder;
    for (const auto& [sc, chain_name] : typed.binds) {
        const auto& expr = typed.chains.at(chain_name);
        RuleChain chain{chain_name, {}};
        for (const auto& item : expr.items) {
            const auto& rule = typed.rules.at(item.rule);
            const auto* ref = std::get_if<NameRef>(&rule.guard);
            Rule r{item.rule,
                   ref != nullptr ? lower_named_guard(*ref, typed) : lower_guard(std::get<CondExpr>(rule.guard), typed),
                   {},
                   item.exit,
                   rule.span};
            for (const auto& inv : rule.actions) {
                auto bound = detail::resolve_invocation(inv, BuiltinKind::action, typed);
                try {
                    r.actions.actions.push_back(Action::make(bound.builtin, std::move(bound.args)));
                } catch (const BuiltinError& e) {
                    detail::rethrow_builtin_error(e, inv.span);
                }
            }
            chain.rules.push_back(std::move(r));
        }
        builder.bind(sc, chain);
    }
    return builder.build();
}

CompileOutput compile_source(const SourceUnit& source) {
    const auto typed = analyze(parse_source(source));
    return CompileOutput{compile(typed), typed.warnings};
}

} // namespace apate::dsl
