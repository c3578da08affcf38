#include "apate/dsl/parser.hpp"

#include <initializer_list>

namespace apate::dsl {

std::string_view decl_type_name(DeclType type) {
    switch (type) {
    case DeclType::condition: return "condition";
    case DeclType::rule: return "rule";
    case DeclType::action: return "action";
    case DeclType::conditionblock: return "conditionblock";
    case DeclType::rulechain: return "rulechain";
    case DeclType::syscall: return "syscall";
    }
    return "?";
}

namespace {

std::string describe(const Token& tok) {
    switch (tok.kind) {
    case TokenKind::identifier: return "identifier '" + tok.text + "'";
    case TokenKind::string: return "string \"" + tok.text + "\"";
    case TokenKind::integer: return "integer " + tok.text;
    default: return std::string(token_kind_name(tok.kind));
    }
}

class Parser {
public:
    explicit Parser(std::span<const Token> tokens) : toks_(tokens) {
        if (toks_.empty() || toks_.back().kind != TokenKind::end) {
            throw std::invalid_argument("token stream must end with an end token");
        }
    }

    Ast program() {
        Ast ast;
        do {
            ast.statements.push_back(statement());
            while (at(TokenKind::semicolon)) {
                ++pos_;
            }
        } while (!at(TokenKind::end));
        return ast;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(std::size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at(TokenKind kind) const { return cur().kind == kind; }

    [[noreturn]] void fail(std::initializer_list<TokenKind> expected) const {
        std::string set;
        for (auto kind : expected) {
            set += (set.empty() ? "" : ", ") + std::string(token_kind_name(kind));
        }
        const std::string prefix = expected.size() == 1 ? "expected " : "expected one of {";
        throw DslError(ErrorKind::syntax_error, cur().span,
                       prefix + set + (expected.size() == 1 ? "" : "}") + ", found " + describe(cur()));
    }

    const Token& expect(TokenKind kind) {
        if (!at(kind)) {
            fail({kind});
        }
        return toks_[pos_++];
    }

    Statement statement() {
        switch (cur().kind) {
        case TokenKind::kw_define: return define();
        case TokenKind::kw_let: return let();
        case TokenKind::kw_bind: return bind();
        default: fail({TokenKind::kw_define, TokenKind::kw_let, TokenKind::kw_bind});
        }
    }

    Define define() {
        Define d;
        d.span = expect(TokenKind::kw_define).span;
        d.names.push_back(expect(TokenKind::identifier).text);
        while (at(TokenKind::comma)) {
            ++pos_;
            d.names.push_back(expect(TokenKind::identifier).text);
        }
        expect(TokenKind::kw_as);
        const auto& type = cur();
        for (auto t : {DeclType::condition, DeclType::rule, DeclType::action, DeclType::conditionblock,
                       DeclType::rulechain, DeclType::syscall}) {
            if (type.kind == TokenKind::identifier && type.text == decl_type_name(t)) {
                d.type = t;
                ++pos_;
                return d;
            }
        }
        throw DslError(ErrorKind::syntax_error, type.span,
                       "expected a type (condition, rule, action, conditionblock, rulechain, syscall), found " +
                           describe(type));
    }

    Let let() {
        Let l;
        l.span = expect(TokenKind::kw_let).span;
        l.name = expect(TokenKind::identifier).text;
        expect(TokenKind::kw_be);
        if (at(TokenKind::identifier)) {
            if (ahead(1).kind == TokenKind::lparen) {
                l.value = invocation();
            } else {
                l.value = NameRef{cur().text, cur().span};
                ++pos_;
            }
        } else if (at(TokenKind::lbrace)) {
            l.value = block();
        } else {
            fail({TokenKind::identifier, TokenKind::lbrace});
        }
        return l;
    }

    Bind bind() {
        Bind b;
        b.span = expect(TokenKind::kw_bind).span;
        b.chain = expect(TokenKind::identifier).text;
        expect(TokenKind::kw_to);
        b.syscall = expect(TokenKind::identifier).text;
        return b;
    }

    Rhs block() {
        const auto open = expect(TokenKind::lbrace).span;
        Rhs body;
        const auto kind = cur().kind;
        const auto next = ahead(1).kind;
        if (kind == TokenKind::lbrace) {
            ++pos_;
            CondExpr guard = or_expr();
            expect(TokenKind::rbrace);
            body = rule_tail(std::move(guard), open);
        } else if (kind == TokenKind::colon ||
                   (kind == TokenKind::identifier && (next == TokenKind::comma || next == TokenKind::rbrace))) {
            body = chain(open);
        } else if (kind == TokenKind::identifier && next == TokenKind::arrow) {
            NameRef guard{cur().text, cur().span};
            ++pos_;
            body = rule_tail(std::move(guard), open);
        } else if (kind == TokenKind::lparen || kind == TokenKind::identifier) {
            body = or_expr();
        } else {
            fail({TokenKind::identifier, TokenKind::lparen, TokenKind::lbrace, TokenKind::colon});
        }
        expect(TokenKind::rbrace);
        return body;
    }

    RuleExpr rule_tail(std::variant<NameRef, CondExpr> guard, SourceSpan span) {
        RuleExpr r;
        r.guard = std::move(guard);
        r.span = span;
        expect(TokenKind::arrow);
        r.actions.push_back(invocation());
        while (at(TokenKind::comma)) {
            ++pos_;
            r.actions.push_back(invocation());
        }
        return r;
    }

    ChainExpr chain(SourceSpan span) {
        ChainExpr c;
        c.span = span;
        while (true) {
            ChainItem item;
            item.span = cur().span;
            if (at(TokenKind::colon)) {
                item.exit = true;
                ++pos_;
            }
            item.rule = expect(TokenKind::identifier).text;
            c.items.push_back(std::move(item));
            if (!at(TokenKind::comma)) {
                return c;
            }
            ++pos_;
        }
    }

    static CondExpr binary(CondExpr::Kind kind, CondExpr left, CondExpr right) {
        CondExpr node;
        node.kind = kind;
        node.span = left.span;
        node.children.push_back(std::move(left));
        node.children.push_back(std::move(right));
        return node;
    }

    // && binds tighter than ||; both associate to the left.
    CondExpr or_expr() {
        CondExpr left = and_expr();
        while (at(TokenKind::or_or)) {
            ++pos_;
            left = binary(CondExpr::Kind::or_op, std::move(left), and_expr());
        }
        return left;
    }

    CondExpr and_expr() {
        CondExpr left = term();
        while (at(TokenKind::and_and)) {
            ++pos_;
            left = binary(CondExpr::Kind::and_op, std::move(left), term());
        }
        return left;
    }

    CondExpr term() {
        if (at(TokenKind::lparen)) {
            ++pos_;
            CondExpr inner = or_expr();
            expect(TokenKind::rparen);
            return inner;
        }
        if (!at(TokenKind::identifier)) {
            fail({TokenKind::identifier, TokenKind::lparen});
        }
        CondExpr leaf;
        leaf.leaf = invocation();
        leaf.span = leaf.leaf.span;
        return leaf;
    }

    Invocation invocation() {
        Invocation inv;
        const auto& name = expect(TokenKind::identifier);
        inv.callee = name.text;
        inv.span = name.span;
        expect(TokenKind::lparen);
        if (at(TokenKind::rparen)) {
            ++pos_;
            return inv;
        }
        while (true) {
            if (at(TokenKind::string)) {
                inv.args.emplace_back(cur().text);
            } else if (at(TokenKind::integer)) {
                inv.args.emplace_back(cur().number);
            } else {
                fail({TokenKind::string, TokenKind::integer});
            }
            ++pos_;
            if (at(TokenKind::semicolon) || at(TokenKind::comma)) {
                ++pos_;
                continue;
            }
            if (at(TokenKind::rparen)) {
                ++pos_;
                return inv;
            }
            fail({TokenKind::semicolon, TokenKind::comma, TokenKind::rparen});
        }
    }

    std::span<const Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace

Ast parse(std::span<const Token> tokens) { return Parser(tokens).program(); }

Ast parse_source(const SourceUnit& source) {
    const auto tokens = tokenize(source);
    return parse(tokens);
}

} // namespace apate::dsl
