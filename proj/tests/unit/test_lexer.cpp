#include "catch_amalgamated.hpp"

#include "apate/dsl/lexer.hpp"

using namespace apate;
using namespace apate::dsl;

namespace {

std::vector<TokenKind> kinds(std::string_view text) {
    std::vector<TokenKind> out;
    for (const auto& t : tokenize(SourceUnit{std::string(text)})) {
        out.push_back(t.kind);
    }
    return out;
}

DslError lex_error(std::string_view text) {
    try {
        tokenize(SourceUnit{std::string(text)});
    } catch (const DslError& e) {
        return e;
    }
    FAIL("no error for " << text);
    throw std::logic_error("unreachable");
}

using K = TokenKind;

} // namespace

TEST_CASE("mysql example rule line") {
    const auto toks = tokenize(SourceUnit{R"(let r2 be {{c3(">",0)}->a2()})"});
    const std::vector<K> want = {K::kw_let, K::identifier, K::kw_be,   K::lbrace, K::lbrace, K::identifier,
                                 K::lparen, K::string,     K::comma,   K::integer, K::rparen, K::rbrace,
                                 K::arrow,  K::identifier, K::lparen,  K::rparen, K::rbrace, K::end};
    REQUIRE(toks.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(toks[i].kind == want[i]);
    }
    CHECK(toks[1].text == "r2");
    CHECK(toks[7].text == ">");
    CHECK(toks[9].number == 0);
    CHECK(toks[0].span.line == 1);
}

TEST_CASE("comments produce no tokens") {
    CHECK(kinds("// :defines exit") == std::vector<K>{K::end});
    CHECK(kinds("a // b c\nd") == std::vector<K>{K::identifier, K::identifier, K::end});
}

TEST_CASE("keywords and punctuation") {
    CHECK(kinds("define as let be bind to") ==
          std::vector<K>{K::kw_define, K::kw_as, K::kw_let, K::kw_be, K::kw_bind, K::kw_to, K::end});
    CHECK(kinds("{ } ( ) , ; : -> && ||") == std::vector<K>{K::lbrace, K::rbrace, K::lparen, K::rparen, K::comma,
                                                             K::semicolon, K::colon, K::arrow, K::and_and, K::or_or,
                                                             K::end});
    CHECK(kinds("defined letter") == std::vector<K>{K::identifier, K::identifier, K::end});
}

TEST_CASE("integers") {
    const auto toks = tokenize(SourceUnit{"-13 0 9223372036854775807"});
    CHECK(toks[0].number == -13);
    CHECK(toks[1].number == 0);
    CHECK(toks[2].number == 9223372036854775807LL);
    CHECK(lex_error("99999999999999999999").kind() == ErrorKind::invalid_literal);
    CHECK(lex_error("12abc").kind() == ErrorKind::illegal_character);
}

TEST_CASE("string escapes and continuations") {
    const auto toks = tokenize(SourceUnit{R"("a\"b\\c\n\t")"});
    CHECK(toks[0].text == "a\"b\\c\n\t");

    const auto spliced = tokenize(SourceUnit{"\"/var/\\\n   lib/mysql/*\""});
    CHECK(spliced[0].text == "/var/lib/mysql/*");

    const auto outside = tokenize(SourceUnit{"a \\\n b"});
    CHECK(outside.size() == 3);
    CHECK(outside[1].span.line == 2);
}

TEST_CASE("lexical errors carry positions") {
    auto e = lex_error(R"("a)");
    CHECK(e.kind() == ErrorKind::unterminated_string);
    CHECK(e.span().line == 1);
    CHECK(e.span().column == 1);
    CHECK(std::string(e.what()).starts_with("1:1: UnterminatedString"));

    auto nl = lex_error("let x be \"abc\nrest\"");
    CHECK(nl.kind() == ErrorKind::unterminated_string);
    CHECK(nl.span().column == 10);

    auto bad = lex_error("let x\n  be @");
    CHECK(bad.kind() == ErrorKind::illegal_character);
    CHECK(bad.span().line == 2);
    CHECK(bad.span().column == 6);

    CHECK(lex_error(R"("\q")").kind() == ErrorKind::illegal_character);
    CHECK(lex_error("a & b").kind() == ErrorKind::illegal_character);
    CHECK(lex_error("a | b").kind() == ErrorKind::illegal_character);
    CHECK(lex_error("a - b").kind() == ErrorKind::illegal_character);
}

TEST_CASE("columns count from one and lines advance") {
    const auto toks = tokenize(SourceUnit{"define\n  c1"});
    CHECK(toks[1].span.line == 2);
    CHECK(toks[1].span.column == 3);
    CHECK(toks.back().kind == K::end);
}
