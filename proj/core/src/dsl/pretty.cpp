#include "apate/dsl/parser.hpp"

namespace apate::dsl {

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out.push_back(c);
        }
    }
    return out + "\"";
}

std::string print(const Invocation& inv) {
    std::string out = inv.callee + "(";
    for (std::size_t i = 0; i < inv.args.size(); ++i) {
        if (i > 0) {
            out += "; ";
        }
        if (const auto* n = std::get_if<std::int64_t>(&inv.args[i])) {
            out += std::to_string(*n);
        } else if (const auto* s = std::get_if<std::string>(&inv.args[i])) {
            out += quote(*s);
        }
    }
    return out + ")";
}

// Binary operands are always parenthesized, so precedence never matters on reparse.
std::string operand(const CondExpr& e) {
    return e.kind == CondExpr::Kind::leaf ? pretty_print(e) : "(" + pretty_print(e) + ")";
}

struct RhsPrinter {
    std::string operator()(const NameRef& n) const { return n.name; }
    std::string operator()(const Invocation& inv) const { return print(inv); }
    std::string operator()(const CondExpr& e) const { return "{" + pretty_print(e) + "}"; }
    std::string operator()(const RuleExpr& r) const {
        std::string out = "{";
        if (const auto* n = std::get_if<NameRef>(&r.guard)) {
            out += n->name;
        } else {
            out += "{" + pretty_print(std::get<CondExpr>(r.guard)) + "}";
        }
        out += " -> ";
        for (std::size_t i = 0; i < r.actions.size(); ++i) {
            out += (i > 0 ? ", " : "") + print(r.actions[i]);
        }
        return out + "}";
    }
    std::string operator()(const ChainExpr& c) const {
        std::string out = "{";
        for (std::size_t i = 0; i < c.items.size(); ++i) {
            out += (i > 0 ? ", " : "") + std::string(c.items[i].exit ? ":" : "") + c.items[i].rule;
        }
        return out + "}";
    }
};

struct StatementPrinter {
    std::string operator()(const Define& d) const {
        std::string out = "define ";
        for (std::size_t i = 0; i < d.names.size(); ++i) {
            out += (i > 0 ? ", " : "") + d.names[i];
        }
        return out + " as " + std::string(decl_type_name(d.type));
    }
    std::string operator()(const Let& l) const { return "let " + l.name + " be " + std::visit(RhsPrinter{}, l.value); }
    std::string operator()(const Bind& b) const { return "bind " + b.chain + " to " + b.syscall; }
};

} // namespace

std::string pretty_print(const CondExpr& expr) {
    switch (expr.kind) {
    case CondExpr::Kind::leaf: return print(expr.leaf);
    case CondExpr::Kind::and_op: return operand(expr.children[0]) + " && " + operand(expr.children[1]);
    case CondExpr::Kind::or_op: return operand(expr.children[0]) + " || " + operand(expr.children[1]);
    }
    return {};
}

std::string pretty_print(const Ast& ast) {
    std::string out;
    for (const auto& st : ast.statements) {
        out += std::visit(StatementPrinter{}, st) + "\n";
    }
    return out;
}

} // namespace apate::dsl
