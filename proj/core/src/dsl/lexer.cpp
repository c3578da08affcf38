#include "apate/dsl/lexer.hpp"

#include <charconv>

namespace apate::dsl {

std::string_view error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::unterminated_string: return "UnterminatedString";
    case ErrorKind::illegal_character: return "IllegalCharacter";
    case ErrorKind::syntax_error: return "SyntaxError";
    case ErrorKind::undefined_name: return "UndefinedName";
    case ErrorKind::redefinition: return "Redefinition";
    case ErrorKind::type_mismatch: return "TypeMismatch";
    case ErrorKind::unknown_builtin: return "UnknownBuiltin";
    case ErrorKind::unknown_syscall: return "UnknownSyscall";
    case ErrorKind::arity_error: return "ArityError";
    case ErrorKind::invalid_literal: return "InvalidLiteral";
    case ErrorKind::duplicate_bind: return "DuplicateBind";
    case ErrorKind::cyclic_definition: return "CyclicDefinition";
    case ErrorKind::contradiction: return "Contradiction";
    }
    return "Error";
}

DslError::DslError(ErrorKind kind, SourceSpan span, const std::string& message)
    : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " +
                         std::string(error_kind_name(kind)) + ": " + message),
      kind_(kind), span_(span), message_(message) {}

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
    case TokenKind::kw_define: return "'define'";
    case TokenKind::kw_as: return "'as'";
    case TokenKind::kw_let: return "'let'";
    case TokenKind::kw_be: return "'be'";
    case TokenKind::kw_bind: return "'bind'";
    case TokenKind::kw_to: return "'to'";
    case TokenKind::identifier: return "identifier";
    case TokenKind::string: return "string";
    case TokenKind::integer: return "integer";
    case TokenKind::lbrace: return "'{'";
    case TokenKind::rbrace: return "'}'";
    case TokenKind::lparen: return "'('";
    case TokenKind::rparen: return "')'";
    case TokenKind::comma: return "','";
    case TokenKind::semicolon: return "';'";
    case TokenKind::colon: return "':'";
    case TokenKind::arrow: return "'->'";
    case TokenKind::and_and: return "'&&'";
    case TokenKind::or_or: return "'||'";
    case TokenKind::end: return "end of input";
    }
    return "token";
}

namespace {

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blank();
            const SourceSpan at = here();
            if (pos_ >= text_.size()) {
                out.push_back(Token{TokenKind::end, "", 0, at});
                return out;
            }
            const char c = text_[pos_];
            if (ident_start(c)) {
                out.push_back(identifier(at));
            } else if (digit(c) || (c == '-' && digit(peek(1)))) {
                out.push_back(integer(at));
            } else if (c == '"') {
                out.push_back(string_literal(at));
            } else {
                out.push_back(punct(at));
            }
        }
    }

private:
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

    SourceSpan here() const { return SourceSpan{line_, col_}; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    // Consumes a backslash-newline (or backslash-CRLF) if one starts here.
    bool continuation() {
        if (peek() != '\\') {
            return false;
        }
        if (peek(1) == '\n') {
            advance();
            advance();
            return true;
        }
        if (peek(1) == '\r' && peek(2) == '\n') {
            advance();
            advance();
            advance();
            return true;
        }
        return false;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < text_.size() && peek() != '\n') {
                    advance();
                }
            } else if (!continuation()) {
                return;
            }
        }
    }

    Token identifier(SourceSpan at) {
        const auto start = pos_;
        while (pos_ < text_.size() && ident_char(peek())) {
            advance();
        }
        std::string word(text_.substr(start, pos_ - start));
        static const std::pair<std::string_view, TokenKind> keywords[] = {
            {"define", TokenKind::kw_define}, {"as", TokenKind::kw_as}, {"let", TokenKind::kw_let},
            {"be", TokenKind::kw_be},         {"bind", TokenKind::kw_bind}, {"to", TokenKind::kw_to},
        };
        for (const auto& [kw, kind] : keywords) {
            if (word == kw) {
                return Token{kind, std::move(word), 0, at};
            }
        }
        return Token{TokenKind::identifier, std::move(word), 0, at};
    }

    Token integer(SourceSpan at) {
        const auto start = pos_;
        advance();
        while (pos_ < text_.size() && digit(peek())) {
            advance();
        }
        if (pos_ < text_.size() && ident_char(peek())) {
            throw DslError(ErrorKind::illegal_character, here(),
                           std::string("unexpected '") + peek() + "' after integer literal");
        }
        const auto digits = text_.substr(start, pos_ - start);
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
            throw DslError(ErrorKind::invalid_literal, at, "integer literal out of range: " + std::string(digits));
        }
        return Token{TokenKind::integer, std::string(digits), value, at};
    }

    Token string_literal(SourceSpan at) {
        advance(); // opening quote
        std::string value;
        while (true) {
            if (pos_ >= text_.size() || peek() == '\n') {
                throw DslError(ErrorKind::unterminated_string, at, "string literal is not closed");
            }
            const char c = peek();
            if (c == '"') {
                advance();
                return Token{TokenKind::string, std::move(value), 0, at};
            }
            if (c != '\\') {
                value.push_back(c);
                advance();
                continue;
            }
            if (continuation()) {
                // The continued line's indentation is layout, not content.
                while (peek() == ' ' || peek() == '\t') {
                    advance();
                }
                continue;
            }
            const SourceSpan esc = here();
            advance();
            switch (peek()) {
            case '"': value.push_back('"'); break;
            case '\\': value.push_back('\\'); break;
            case 'n': value.push_back('\n'); break;
            case 't': value.push_back('\t'); break;
            case '\0':
                throw DslError(ErrorKind::unterminated_string, at, "string literal is not closed");
            default:
                throw DslError(ErrorKind::illegal_character, esc, std::string("unknown escape '\\") + peek() + "'");
            }
            advance();
        }
    }

    Token punct(SourceSpan at) {
        const char c = peek();
        auto one = [&](TokenKind kind) {
            advance();
            return Token{kind, std::string(1, c), 0, at};
        };
        auto two = [&](TokenKind kind) {
            std::string text(text_.substr(pos_, 2));
            advance();
            advance();
            return Token{kind, std::move(text), 0, at};
        };
        switch (c) {
        case '{': return one(TokenKind::lbrace);
        case '}': return one(TokenKind::rbrace);
        case '(': return one(TokenKind::lparen);
        case ')': return one(TokenKind::rparen);
        case ',': return one(TokenKind::comma);
        case ';': return one(TokenKind::semicolon);
        case ':': return one(TokenKind::colon);
        case '-':
            if (peek(1) == '>') {
                return two(TokenKind::arrow);
            }
            break;
        case '&':
            if (peek(1) == '&') {
                return two(TokenKind::and_and);
            }
            break;
        case '|':
            if (peek(1) == '|') {
                return two(TokenKind::or_or);
            }
            break;
        default: break;
        }
        const auto byte = static_cast<unsigned char>(c);
        std::string shown = byte >= 0x20 && byte < 0x7f ? std::string(1, c) : "\\x" + hex(byte);
        throw DslError(ErrorKind::illegal_character, at, "illegal character '" + shown + "'");
    }

    static std::string hex(unsigned char b) {
        const char* digits = "0123456789abcdef";
        return {digits[b >> 4], digits[b & 0xf]};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
};

} // namespace

std::vector<Token> tokenize(const SourceUnit& source) { return Lexer(source.text).run(); }

} // namespace apate::dsl
