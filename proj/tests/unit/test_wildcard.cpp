#include "catch_amalgamated.hpp"

#include "apate/wildcard.hpp"
#include "test_support.hpp"

using namespace apate;

TEST_CASE("pattern parsing") {
    auto p = WildcardPattern::parse("/var/lib/mysql/*");
    REQUIRE(p);
    CHECK(p->literal_prefix() == "/var/lib/mysql/");
    CHECK(p->has_tail_star());
    CHECK(p->text() == "/var/lib/mysql/*");

    auto exact = WildcardPattern::parse("mysql");
    REQUIRE(exact);
    CHECK_FALSE(exact->has_tail_star());

    CHECK_FALSE(WildcardPattern::parse("a*b").has_value());
    CHECK_FALSE(WildcardPattern::parse("**").has_value());
    CHECK_FALSE(WildcardPattern::parse("*a").has_value());
}

TEST_CASE("matching examples") {
    CHECK(WildcardPattern::parse("mysql")->matches("mysql"));
    CHECK_FALSE(WildcardPattern::parse("mysql")->matches("mysqld"));
    CHECK(WildcardPattern::parse("mysql*")->matches("mysqld"));
    CHECK(WildcardPattern::parse("mysql*")->matches("mysql"));
    CHECK(WildcardPattern::parse("*")->matches(""));
    CHECK(WildcardPattern::parse("*")->matches("anything"));
    CHECK(WildcardPattern::parse("")->matches(""));
    CHECK_FALSE(WildcardPattern::parse("")->matches("x"));
}

TEST_CASE("randomized strings agree with a prefix-check oracle") {
    test::Rng rng(7);
    const std::string alphabet = "ab/";
    auto random_string = [&](int max_len) {
        std::string s;
        const auto n = test::uniform(rng, 0, max_len);
        for (int i = 0; i < n; ++i) {
            s.push_back(alphabet[static_cast<std::size_t>(test::uniform(rng, 0, 2))]);
        }
        return s;
    };
    for (int i = 0; i < 20000; ++i) {
        auto text = random_string(4);
        if (test::coin(rng)) {
            text += "*";
        }
        const auto subject = random_string(6);
        auto p = WildcardPattern::parse(text);
        REQUIRE(p);
        INFO(text << " vs " << subject);
        CHECK(p->matches(subject) == test::oracle_match(text, subject));
    }
}
