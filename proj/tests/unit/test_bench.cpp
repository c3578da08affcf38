#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apate/bench.hpp"
#include "apate/log.hpp"
#include "test_support.hpp"

using namespace apate;
using namespace apate::bench;

namespace {

std::vector<std::uint64_t> oracle_sizes(std::uint64_t max) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t l = 1; l <= max;) {
        out.push_back(l);
        l += l < 1'000'000 ? 1 : l < 100'000'000 ? 1'000 : 1'000'000;
    }
    return out;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("setting names") {
    for (auto id : {SettingId::m1, SettingId::m2, SettingId::m3, SettingId::m4}) {
        CHECK(parse_setting(setting_name(id)) == id);
    }
    CHECK(setting_name(SettingId::m3) == "m3");
    CHECK_FALSE(parse_setting("m5").has_value());
}

TEST_CASE("size schedule") {
    const auto first = gen_sizes(3);
    CHECK(first == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(gen_sizes(10'000).size() == 10'000);
    CHECK(gen_sizes(1) == std::vector<std::uint64_t>{1});

    const auto around = gen_sizes(1'002'500);
    REQUIRE(around.size() >= 3);
    CHECK(around[999'998] == 999'999);
    CHECK(around[999'999] == 1'000'000);
    CHECK(around[1'000'000] == 1'001'000);
    CHECK(around.back() == 1'002'000);
    CHECK(around == oracle_sizes(1'002'500));

    CHECK_THROWS_AS(gen_sizes(0), std::invalid_argument);
    CHECK_THROWS_AS(gen_sizes(1'000'000'001), std::invalid_argument);
}

TEST_CASE("size schedule crosses 10^8") {
    const auto sizes = gen_sizes(103'000'000);
    CHECK(sizes == oracle_sizes(103'000'000));
    CHECK(std::is_sorted(sizes.begin(), sizes.end()));
    const auto at = std::find(sizes.begin(), sizes.end(), 100'000'000ULL);
    REQUIRE(at != sizes.end());
    CHECK(*(at + 1) == 101'000'000);

    const auto alt = gen_sizes(103'000'000, Recurrence::second_previous);
    const auto alt_at = std::find(alt.begin(), alt.end(), 100'000'000ULL);
    REQUIRE(alt_at != alt.end());
    CHECK(*(alt_at + 1) == 100'999'000);
    CHECK(*(alt_at + 2) == 101'000'000);
    CHECK(*(alt_at + 3) == 101'999'000);
    CHECK(std::adjacent_find(alt.begin(), alt.end(), std::greater_equal<>()) == alt.end());
}

TEST_CASE("geometric subsample") {
    const auto sizes = gen_sizes(2'000'000);
    const auto sub = subsample_geometric(sizes, 40);
    REQUIRE(sub.size() == 40);
    CHECK(sub.front() == 1);
    CHECK(sub.back() == sizes.back());
    CHECK(std::adjacent_find(sub.begin(), sub.end(), std::greater_equal<>()) == sub.end());
    for (auto s : sub) {
        CHECK(std::binary_search(sizes.begin(), sizes.end(), s));
    }
    CHECK(subsample_geometric(sizes, 1) == std::vector<std::uint64_t>{sizes.back()});
    CHECK(subsample_geometric(sizes, 0).empty());
    const std::vector<std::uint64_t> few = {5, 6, 7};
    CHECK(subsample_geometric(few, 10) == few);
}

TEST_CASE("sample statistics") {
    const std::vector<double> a = {4, 1, 3, 2};
    const auto s = stats(a);
    CHECK(s.n == 4);
    CHECK(s.sd == Catch::Approx(1.29099).epsilon(1e-5));
    CHECK(s.var == Catch::Approx(1.66667).epsilon(1e-5));
    CHECK(s.iqr == Catch::Approx(1.5));
    CHECK(s.median == Catch::Approx(2.5));
    CHECK(std::abs(s.var - s.sd * s.sd) <= 1e-12 * s.var);

    const std::vector<double> flat = {2, 2, 2, 2};
    const auto f = stats(flat);
    CHECK(f.sd == 0.0);
    CHECK(f.var == 0.0);
    CHECK(f.iqr == 0.0);

    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(stats(one), TooFewSamples);
    CHECK_THROWS_AS(stats(std::vector<double>{}), TooFewSamples);
}

TEST_CASE("statistics against a direct computation") {
    test::Rng rng(0x57a7);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> xs(static_cast<std::size_t>(test::uniform(rng, 2, 60)));
        for (auto& x : xs) {
            x = static_cast<double>(test::uniform(rng, 0, 1'000'000)) / 1000.0;
        }
        double mean = 0;
        for (auto x : xs) {
            mean += x;
        }
        mean /= static_cast<double>(xs.size());
        double ss = 0;
        for (auto x : xs) {
            ss += (x - mean) * (x - mean);
        }
        const double var = ss / static_cast<double>(xs.size() - 1);
        auto sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        // Type 7: h = (n - 1) p, interpolate between floor(h) and floor(h) + 1.
        const auto q = [&](double p) {
            const double h = static_cast<double>(sorted.size() - 1) * p;
            const auto lo = static_cast<std::size_t>(h);
            const auto hi = std::min(lo + 1, sorted.size() - 1);
            return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
        };
        const auto s = stats(xs);
        CHECK(s.var == Catch::Approx(var).epsilon(1e-9));
        CHECK(s.sd == Catch::Approx(std::sqrt(var)).epsilon(1e-9));
        CHECK(s.iqr == Catch::Approx(q(0.75) - q(0.25)).margin(1e-9));
        CHECK(s.median == Catch::Approx(q(0.5)).margin(1e-9));
    }
}

TEST_CASE("settings") {
    CHECK_FALSE(make_setting(SettingId::m1).intercept);
    CHECK(make_setting(SettingId::m1).program.empty());
    for (auto id : {SettingId::m2, SettingId::m3, SettingId::m4}) {
        const auto s = make_setting(id);
        CHECK(s.intercept);
        for (auto sc : kAllSyscalls) {
            REQUIRE(s.program.chain_for(sc) != nullptr);
        }
    }
    const auto m2 = make_setting(SettingId::m2);
    const auto& m2_rules = m2.program.chain_for(Syscall::open)->rules;
    REQUIRE(m2_rules.size() == 1);
    CHECK(m2_rules[0].guard.leaves()[0].is_always_true());
    CHECK(m2_rules[0].actions == ActionChain{{Action::make("call_orig"), Action::make("log")}});

    for (auto id : {SettingId::m3, SettingId::m4}) {
        const auto s = make_setting(id);
        const auto& rules = s.program.chain_for(Syscall::read)->rules;
        REQUIRE(rules.size() == kRulesPerSetting);
        for (const auto& r : rules) {
            CHECK(r.guard.leaves().size() == kConditionsPerRule);
            CHECK(r.guard.root_op() == BlockOp::and_op);
        }
        CHECK(rules[0].actions.actions.size() == (id == SettingId::m4 ? 2u : 1u));
        CHECK(rules[0].actions.actions[0].builtin == "call_orig");
    }
}

TEST_CASE("m3 evaluates 2500 conditions and only the last rule fires") {
    const auto m3 = make_setting(SettingId::m3);
    SandboxState sb;
    sb.vfs.put_file("/etc/passwd", "root:");
    const auto d = dispatch(m3.program, make_event(Syscall::open, {std::string("/etc/passwd")}), sb);
    CHECK(d.conditions_evaluated == kRulesPerSetting * kConditionsPerRule);
    CHECK(d.conditions_evaluated == 2500);
    CHECK(d.matched_rules == std::vector<std::size_t>{49});
    CHECK(d.original_executed);
    CHECK(d.result == 3);
    CHECK(d.log_records == 0);
}

TEST_CASE("copy workload counters") {
    SECTION("100000 bytes through m3") {
        SandboxState sb;
        const auto r = run_copy(100'000, make_setting(SettingId::m3), sb);
        // open, open, read, write, read, write, read, close, close, unlink
        CHECK(r.syscalls == 10);
        CHECK(r.conditions == 25'000);
        CHECK(r.log_records == 0);
        CHECK_FALSE(sb.vfs.exists("/bench/target"));
    }
    SECTION("below the buffer size") {
        SandboxState sb;
        const auto r = run_copy(1000, make_setting(SettingId::m4), sb);
        // 2 open, 2 reads (data + EOF), 1 write, 2 close, 1 unlink
        CHECK(r.syscalls == 8);
        CHECK(r.conditions == 8 * 2500);
        CHECK(r.log_records == 8);
    }
    SECTION("exact multiple of the buffer") {
        SandboxState sb;
        const auto r = run_copy(2 * kDefaultBuffer, make_setting(SettingId::m1), sb);
        // 2 open, 3 reads, 2 writes, 2 close, 1 unlink
        CHECK(r.syscalls == 10);
    }
    SECTION("m1 never evaluates a condition") {
        test::Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            SandboxState sb;
            const auto size = static_cast<std::uint64_t>(test::uniform(rng, 1, 300'000));
            const auto r = run_copy(size, make_setting(SettingId::m1), sb);
            CHECK(r.conditions == 0);
            CHECK(r.log_records == 0);
        }
    }
    SECTION("m2 logs every syscall") {
        SandboxState sb;
        auto sink = std::make_shared<MemorySink>();
        sb.logs.add_sink(sink);
        const auto r = run_copy(100'000, make_setting(SettingId::m2), sb);
        CHECK(r.log_records == r.syscalls);
        CHECK(sink->lines().size() == r.syscalls);
        CHECK(r.conditions == 2 * r.syscalls);
    }
    SECTION("odd buffer size") {
        SandboxState sb;
        const auto r = run_copy(100'000, make_setting(SettingId::m3), sb, 65'365);
        CHECK(r.syscalls == 10);
    }
    SECTION("bad arguments") {
        SandboxState sb;
        CHECK_THROWS_AS(run_copy(0, make_setting(SettingId::m1), sb), std::invalid_argument);
        CHECK_THROWS_AS(run_copy(10, make_setting(SettingId::m1), sb, 0), std::invalid_argument);
    }
}

TEST_CASE("condition count law") {
    // syscalls for one copy: 2 open + 2 close + 1 unlink + reads + writes
    const auto hooked = [](std::uint64_t size, std::uint64_t buffer) {
        const auto writes = (size + buffer - 1) / buffer;
        return 5 + writes + (writes + 1);
    };
    test::Rng rng(0x1a3);
    for (int i = 0; i < 25; ++i) {
        const auto size = static_cast<std::uint64_t>(test::uniform(rng, 1, 400'000));
        const auto buffer = static_cast<std::uint64_t>(test::uniform(rng, 1'000, 70'000));
        SandboxState sb;
        const auto r = run_copy(size, make_setting(SettingId::m3), sb, buffer);
        CHECK(r.syscalls == hooked(size, buffer));
        CHECK(r.conditions == 2500 * r.syscalls);
    }
    // The 1 GB figure, symbolically.
    constexpr std::uint64_t gb_syscalls = 32'720;
    STATIC_REQUIRE(kRulesPerSetting * kConditionsPerRule * gb_syscalls == 81'800'000);
}

TEST_CASE("repeated runs only differ in time") {
    SandboxState a;
    SandboxState b;
    const auto r1 = run_copy(70'000, make_setting(SettingId::m4), a, kDefaultBuffer, 9);
    const auto r2 = run_copy(70'000, make_setting(SettingId::m4), b, kDefaultBuffer, 9);
    CHECK(r1.syscalls == r2.syscalls);
    CHECK(r1.conditions == r2.conditions);
    CHECK(r1.log_records == r2.log_records);
    CHECK(a.same_world(b));
}

TEST_CASE("suite layout and CSV") {
    const std::vector<SettingId> settings = {SettingId::m1, SettingId::m3};
    const std::vector<std::uint64_t> sizes = {10, 1000, 70'000};
    SuiteOptions options;
    options.reps = 100;
    const auto rows = run_suite(settings, sizes, options);
    CHECK(rows.size() == 600);
    for (const auto& row : rows) {
        CHECK(row.copy.conditions == (row.setting == SettingId::m1 ? 0 : 2500 * row.copy.syscalls));
    }

    std::ostringstream csv;
    write_rows_csv(csv, rows);
    const auto text = csv.str();
    CHECK(text.starts_with("setting,size,rep,runtime_sec,syscalls,conditions\n"));
    CHECK(count_lines(text) == 601);

    const auto summary = summarize(rows);
    CHECK(summary.size() == 6);
    for (const auto& s : summary) {
        CHECK(s.stats.n == 100);
        CHECK(s.stats.var == Catch::Approx(s.stats.sd * s.stats.sd));
    }
    std::ostringstream sum_csv;
    write_summary_csv(sum_csv, summary);
    CHECK(sum_csv.str().starts_with("setting,size,n,median,sd,var,iqr\n"));
    CHECK(count_lines(sum_csv.str()) == 7);
}

TEST_CASE("suite sinks attach to logging settings only") {
    std::vector<std::shared_ptr<MemorySink>> made;
    SuiteOptions options;
    options.reps = 3;
    options.make_sink = [&made] {
        made.push_back(std::make_shared<MemorySink>());
        return made.back();
    };
    const std::vector<SettingId> settings = {SettingId::m1, SettingId::m2, SettingId::m3, SettingId::m4};
    const std::vector<std::uint64_t> sizes = {100};
    const auto rows = run_suite(settings, sizes, options);
    CHECK(rows.size() == 12);
    REQUIRE(made.size() == 2);
    // 8 syscalls per copy, 3 reps
    CHECK(made[0]->lines().size() == 24);
    CHECK(made[1]->lines().size() == 24);
}
