#include <set>

#include "apate/dsl/compiler.hpp"
#include "resolve.hpp"

namespace apate::dsl {

namespace detail {

void rethrow_builtin_error(const BuiltinError& e, SourceSpan span) {
    switch (e.kind()) {
    case BuiltinError::Kind::unknown_builtin: throw DslError(ErrorKind::unknown_builtin, span, e.what());
    case BuiltinError::Kind::wrong_kind:
    case BuiltinError::Kind::type_mismatch: throw DslError(ErrorKind::type_mismatch, span, e.what());
    case BuiltinError::Kind::arity: throw DslError(ErrorKind::arity_error, span, e.what());
    case BuiltinError::Kind::bad_param: throw DslError(ErrorKind::invalid_literal, span, e.what());
    }
    throw DslError(ErrorKind::invalid_literal, span, e.what());
}

BoundBuiltin resolve_invocation(const Invocation& inv, BuiltinKind kind, const TypedProgram& typed) {
    const auto& own = kind == BuiltinKind::condition ? typed.conditions : typed.actions;
    BoundBuiltin out;
    if (auto it = own.find(inv.callee); it != own.end()) {
        out = it->second;
    } else if (const auto* spec = find_builtin(inv.callee); spec != nullptr) {
        if (spec->kind != kind) {
            throw DslError(ErrorKind::type_mismatch, inv.span,
                           inv.callee + " is " + (spec->kind == BuiltinKind::condition ? "a condition" : "an action") +
                               " builtin, used where " +
                               (kind == BuiltinKind::condition ? "a condition" : "an action") + " is expected");
        }
        out.builtin = spec->name;
    } else {
        throw DslError(ErrorKind::undefined_name, inv.span,
                       inv.callee + " is neither a bound " +
                           (kind == BuiltinKind::condition ? "condition" : "action") + " nor a builtin");
    }
    out.args.insert(out.args.end(), inv.args.begin(), inv.args.end());
    return out;
}

} // namespace detail

namespace {

using detail::resolve_invocation;
using detail::rethrow_builtin_error;

struct Decl {
    DeclType type;
    SourceSpan span;
    bool bound = false;
    bool used = false;
};

class Analyzer {
public:
    TypedProgram run(const Ast& ast) {
        for (const auto& st : ast.statements) {
            std::visit([this](const auto& s) { statement(s); }, st);
        }
        for (const auto& [name, decl] : decls_) {
            if (!decl.used) {
                out_.warnings.push_back(Warning{decl.span, decl.bound ? name + " is defined but never used"
                                                                      : name + " is declared but never given a value"});
            }
        }
        return std::move(out_);
    }

private:
    void statement(const Define& d) {
        for (const auto& name : d.names) {
            if (decls_.contains(name)) {
                throw DslError(ErrorKind::redefinition, d.span, name + " is already declared");
            }
            decls_.emplace(name, Decl{d.type, d.span});
        }
    }

    void statement(const Let& l) {
        auto it = decls_.find(l.name);
        if (it == decls_.end()) {
            throw DslError(ErrorKind::undefined_name, l.span, l.name + " is not declared; add a define statement");
        }
        if (it->second.bound) {
            throw DslError(ErrorKind::redefinition, l.span, l.name + " already has a value");
        }
        current_ = l.name;
        switch (it->second.type) {
        case DeclType::condition: out_.conditions[l.name] = builtin_value(l, BuiltinKind::condition); break;
        case DeclType::action: out_.actions[l.name] = builtin_value(l, BuiltinKind::action); break;
        case DeclType::conditionblock: out_.blocks[l.name] = block_value(l); break;
        case DeclType::rule: out_.rules[l.name] = rule_value(l); break;
        case DeclType::rulechain: out_.chains[l.name] = chain_value(l); break;
        case DeclType::syscall: syscalls_[l.name] = syscall_value(l); break;
        }
        it->second.bound = true;
        current_.clear();
    }

    void statement(const Bind& b) {
        reference(b.chain, DeclType::rulechain, b.span);
        Syscall sc = Syscall::open;
        if (decls_.contains(b.syscall)) {
            reference(b.syscall, DeclType::syscall, b.span);
            sc = syscalls_.at(b.syscall);
        } else if (auto direct = syscall_from_name(b.syscall)) {
            sc = *direct;
        } else {
            throw DslError(ErrorKind::unknown_syscall, b.span, "unknown syscall " + b.syscall);
        }
        if (out_.binds.contains(sc)) {
            const auto first = out_.bind_spans.at(sc);
            throw DslError(ErrorKind::duplicate_bind, b.span,
                           std::string(hook_name(sc)) + " is already bound at line " + std::to_string(first.line));
        }
        out_.binds.emplace(sc, b.chain);
        out_.bind_spans.emplace(sc, b.span);
    }

    // Marks a user name as used after checking it is declared, bound and of the expected type.
    void reference(const std::string& name, DeclType type, SourceSpan span) {
        auto it = decls_.find(name);
        if (it == decls_.end()) {
            throw DslError(ErrorKind::undefined_name, span, name + " is not declared");
        }
        if (name == current_) {
            throw DslError(ErrorKind::cyclic_definition, span, name + " refers to itself");
        }
        if (!it->second.bound) {
            throw DslError(ErrorKind::undefined_name, span, name + " is used before it is given a value");
        }
        if (it->second.type != type) {
            throw DslError(ErrorKind::type_mismatch, span,
                           name + " is a " + std::string(decl_type_name(it->second.type)) + ", expected a " +
                               std::string(decl_type_name(type)));
        }
        it->second.used = true;
    }

    // True when `name` is a declared user name that should shadow registry builtins.
    bool user_name(const std::string& name) const { return decls_.contains(name) && name != current_; }

    [[noreturn]] void mismatch(const Let& l, std::string_view what) const {
        throw DslError(ErrorKind::type_mismatch, l.span,
                       l.name + " is declared as " + std::string(decl_type_name(decls_.at(l.name).type)) +
                           " but is given " + std::string(what));
    }

    BoundBuiltin check_builtin(const Invocation& inv, BuiltinKind kind, bool complete) {
        if (user_name(inv.callee)) {
            reference(inv.callee, kind == BuiltinKind::condition ? DeclType::condition : DeclType::action, inv.span);
        } else if (decls_.contains(inv.callee) && find_builtin(inv.callee) == nullptr) {
            throw DslError(ErrorKind::cyclic_definition, inv.span, inv.callee + " refers to itself");
        } else if (find_builtin(inv.callee) == nullptr) {
            throw DslError(ErrorKind::unknown_builtin, inv.span, "unknown builtin " + inv.callee);
        }
        auto bound = resolve_invocation(inv, kind, out_);
        const auto* spec = find_builtin(bound.builtin);
        if (bound.args.size() > spec->max_arity()) {
            throw DslError(ErrorKind::arity_error, inv.span,
                           bound.builtin + " takes at most " + std::to_string(spec->max_arity()) + " arguments, got " +
                               std::to_string(bound.args.size()));
        }
        // A partial application is checked in full once it is complete.
        if (complete || bound.args.size() >= spec->min_arity()) {
            try {
                if (kind == BuiltinKind::condition) {
                    (void)prepare_condition(bound.builtin, bound.args);
                } else {
                    (void)prepare_action(bound.builtin, bound.args);
                }
            } catch (const BuiltinError& e) {
                rethrow_builtin_error(e, inv.span);
            }
        }
        return bound;
    }

    BoundBuiltin builtin_value(const Let& l, BuiltinKind kind) {
        if (const auto* ref = std::get_if<NameRef>(&l.value)) {
            return check_builtin(Invocation{ref->name, {}, ref->span}, kind, false);
        }
        if (const auto* inv = std::get_if<Invocation>(&l.value)) {
            return check_builtin(*inv, kind, false);
        }
        mismatch(l, "a block");
    }

    void check_cond(const CondExpr& e) {
        if (e.kind == CondExpr::Kind::leaf) {
            check_builtin(e.leaf, BuiltinKind::condition, true);
            return;
        }
        for (const auto& child : e.children) {
            check_cond(child);
        }
    }

    CondExpr block_value(const Let& l) {
        if (const auto* e = std::get_if<CondExpr>(&l.value)) {
            check_cond(*e);
            return *e;
        }
        if (const auto* inv = std::get_if<Invocation>(&l.value)) {
            CondExpr leaf;
            leaf.leaf = *inv;
            leaf.span = inv->span;
            check_cond(leaf);
            return leaf;
        }
        if (const auto* ref = std::get_if<NameRef>(&l.value)) {
            auto it = decls_.find(ref->name);
            const bool builtin = it == decls_.end() && find_builtin(ref->name) != nullptr;
            if (builtin || (it != decls_.end() && it->second.type == DeclType::condition)) {
                CondExpr leaf;
                leaf.leaf = Invocation{ref->name, {}, ref->span};
                leaf.span = ref->span;
                check_cond(leaf);
                return leaf;
            }
            reference(ref->name, DeclType::conditionblock, ref->span);
            return out_.blocks.at(ref->name);
        }
        mismatch(l, "a rule or chain");
    }

    // A bare registry name where a rule or chain is expected.
    void reject_builtin_ref(const Let& l, const NameRef& ref) const {
        if (!decls_.contains(ref.name)) {
            if (const auto* spec = find_builtin(ref.name)) {
                mismatch(l, std::string(spec->kind == BuiltinKind::condition ? "the condition" : "the action") +
                                " builtin " + ref.name);
            }
        }
    }

    RuleExpr rule_value(const Let& l) {
        if (const auto* ref = std::get_if<NameRef>(&l.value)) {
            reject_builtin_ref(l, *ref);
            reference(ref->name, DeclType::rule, ref->span);
            return out_.rules.at(ref->name);
        }
        const auto* r = std::get_if<RuleExpr>(&l.value);
        if (r == nullptr) {
            mismatch(l, std::holds_alternative<ChainExpr>(l.value) ? "a rule chain" : "a condition");
        }
        if (const auto* g = std::get_if<NameRef>(&r->guard)) {
            auto it = decls_.find(g->name);
            const bool is_condition = it != decls_.end() && it->second.type == DeclType::condition;
            if (is_condition) {
                reference(g->name, DeclType::condition, g->span);
                check_builtin(Invocation{g->name, {}, g->span}, BuiltinKind::condition, true);
            } else {
                reference(g->name, DeclType::conditionblock, g->span);
            }
        } else {
            check_cond(std::get<CondExpr>(r->guard));
        }
        bool blocked = false;
        for (const auto& inv : r->actions) {
            const auto bound = check_builtin(inv, BuiltinKind::action, true);
            if (bound.builtin == "call_orig" && blocked) {
                throw DslError(ErrorKind::contradiction, inv.span,
                               "call_orig after block: the original syscall can no longer run");
            }
            blocked = blocked || bound.builtin == "block";
            if (bound.builtin == "manipulateparam") {
                const auto action = prepare_action(bound.builtin, bound.args);
                if (action.pattern.matches(action.text)) {
                    out_.warnings.push_back(Warning{inv.span, "manipulateparam replacement \"" + action.text +
                                                                  "\" matches its own pattern; repeated rewrites "
                                                                  "will keep applying"});
                }
            }
        }
        return *r;
    }

    ChainExpr chain_value(const Let& l) {
        if (const auto* ref = std::get_if<NameRef>(&l.value)) {
            reject_builtin_ref(l, *ref);
            reference(ref->name, DeclType::rulechain, ref->span);
            return out_.chains.at(ref->name);
        }
        const auto* c = std::get_if<ChainExpr>(&l.value);
        if (c == nullptr) {
            mismatch(l, std::holds_alternative<RuleExpr>(l.value) ? "a rule" : "a condition");
        }
        for (const auto& item : c->items) {
            reference(item.rule, DeclType::rule, item.span);
        }
        return *c;
    }

    Syscall syscall_value(const Let& l) {
        const auto* ref = std::get_if<NameRef>(&l.value);
        if (ref == nullptr) {
            mismatch(l, "a non-syscall value");
        }
        if (user_name(ref->name)) {
            reference(ref->name, DeclType::syscall, ref->span);
            return syscalls_.at(ref->name);
        }
        if (auto sc = syscall_from_name(ref->name)) {
            return *sc;
        }
        throw DslError(ErrorKind::unknown_syscall, ref->span, "unknown syscall " + ref->name);
    }

    TypedProgram out_;
    std::map<std::string, Decl, std::less<>> decls_;
    std::map<std::string, Syscall, std::less<>> syscalls_;
    std::string current_;
};

} // namespace

TypedProgram analyze(const Ast& ast) { return Analyzer().run(ast); }

} // namespace apate::dsl
