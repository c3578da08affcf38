#include "catch_amalgamated.hpp"

#include <limits>

#include "apate/builtins.hpp"
#include "apate/engine.hpp"
#include "test_support.hpp"

using namespace apate;

namespace {

TaskContext ctx_with(std::int64_t uid, std::string parent = "bash", std::int64_t pid = 100) {
    TaskContext t;
    t.pid = pid;
    t.uid = uid;
    t.ssid = 5;
    t.pname = "tool";
    t.parent_pname = std::move(parent);
    return t;
}

int cond(std::string_view name, std::vector<Value> params, const SyscallEvent& ev, SandboxState& sb) {
    return eval_condition(Condition::make(name, std::move(params)), ev, sb);
}

SyscallEvent open_ev(std::string path, TaskContext t = ctx_with(1000)) {
    return make_event(Syscall::open, {std::move(path)}, std::move(t));
}

// Runs a single action against a fresh evaluation context.
struct ActionRun {
    SyscallEvent ev;
    SandboxState& sb;
    EvalContext ctx;
    ActionRun(SyscallEvent e, SandboxState& s) : ev(std::move(e)), sb(s), ctx(ev, sb) {}
    int run(std::string_view name, std::vector<Value> params = {}) {
        return execute(Action::make(name, std::move(params)).prepared, ctx);
    }
};

} // namespace

TEST_CASE("registry exposes kinds and arities") {
    const auto* tp = find_builtin("testforparam");
    REQUIRE(tp);
    CHECK(tp->kind == BuiltinKind::condition);
    CHECK(tp->min_arity() == 2);
    const auto* blk = find_builtin("block");
    REQUIRE(blk);
    CHECK(blk->kind == BuiltinKind::action);
    CHECK(blk->min_arity() == 0);
    CHECK(blk->max_arity() == 1);
    CHECK(find_builtin("nonsense") == nullptr);
    for (const auto& spec : builtin_registry()) {
        CHECK(find_builtin(spec.name) == &spec);
        CHECK_FALSE(spec.summary.empty());
    }
}

TEST_CASE("preparation rejects bad invocations") {
    using K = BuiltinError::Kind;
    auto kind_of = [](auto fn) {
        try {
            fn();
        } catch (const BuiltinError& e) {
            return e.kind();
        }
        FAIL("no BuiltinError");
        return K::unknown_builtin;
    };
    CHECK(kind_of([] { Condition::make("nope"); }) == K::unknown_builtin);
    CHECK(kind_of([] { Condition::make("log"); }) == K::wrong_kind);
    CHECK(kind_of([] { Action::make("testforuid", {std::string(">"), std::int64_t{0}}); }) == K::wrong_kind);
    CHECK(kind_of([] { Condition::make("testforuid", {std::string(">")}); }) == K::arity);
    CHECK(kind_of([] { Condition::make("testforuid", {std::int64_t{1}, std::int64_t{0}}); }) == K::type_mismatch);
    CHECK(kind_of([] { Condition::make("testforuid", {std::string("=~"), std::int64_t{0}}); }) == K::bad_param);
    CHECK(kind_of([] { Condition::make("testforpname", {std::string("a*b")}); }) == K::bad_param);
    CHECK(kind_of([] { Condition::make("testforparam", {std::int64_t{-1}, std::string("x")}); }) == K::bad_param);
    CHECK(kind_of([] { Condition::make("ctxfield_cmp", {std::string("gid"), std::string("=="), std::int64_t{0}}); }) ==
          K::bad_param);
}

TEST_CASE("always_true") {
    test::Rng rng(1);
    SandboxState sb;
    for (int i = 0; i < 100; ++i) {
        CHECK(eval_condition(Condition::always_true(), test::random_open(rng), sb) == 1);
    }
    CHECK(Condition::always_true().param_source() == ParamSource::none);
}

TEST_CASE("testforpname looks at the parent process") {
    SandboxState sb;
    CHECK(cond("testforpname", {std::string("mysql")}, open_ev("/x", ctx_with(0, "mysql")), sb) == 1);
    CHECK(cond("testforpname", {std::string("mysql")}, open_ev("/x", ctx_with(0, "mysqld")), sb) == 0);
    CHECK(cond("testforpname", {std::string("mysql*")}, open_ev("/x", ctx_with(0, "mysqld")), sb) == 1);
    CHECK(cond("testforselfpname", {std::string("tool")}, open_ev("/x"), sb) == 1);
    CHECK(cond("testforselfpname", {std::string("mysql")}, open_ev("/x", ctx_with(0, "mysql")), sb) == 0);
}

TEST_CASE("testforparam") {
    SandboxState sb;
    CHECK(cond("testforparam", {std::int64_t{0}, std::string("/var/lib/mysql/*")},
               open_ev("/var/lib/mysql/ib_logfile0"), sb) == 1);
    CHECK(cond("testforparam", {std::int64_t{0}, std::string("/etc/passwd")}, open_ev("/etc/passwd"), sb) == 1);
    CHECK(cond("testforparam", {std::int64_t{1}, std::string("0")}, open_ev("/etc/passwd"), sb) == 1);

    auto probe_ev = open_ev("/etc/passwd");
    EvalContext ctx_probe(probe_ev, sb);
    CHECK(eval_condition(Condition::make("testforparam", {std::int64_t{3}, std::string("x")}), ctx_probe) == 0);
    REQUIRE(ctx_probe.diagnostics.size() == 1);
    CHECK(ctx_probe.diagnostics[0].starts_with("ArgIndexOutOfRange"));
    CHECK(ctx_probe.conditions_evaluated == 1);
}

TEST_CASE("testforpath normalizes before matching") {
    SandboxState sb;
    CHECK(cond("testforpath", {std::int64_t{0}, std::string("/var/log/.ap.log")}, open_ev("/var//log/./.ap.log"),
               sb) == 1);
    CHECK(cond("testforparam", {std::int64_t{0}, std::string("/var/log/.ap.log")}, open_ev("/var//log/./.ap.log"),
               sb) == 0);
}

TEST_CASE("testforfd resolves the descriptor's path") {
    SandboxState sb;
    sb.vfs.put_file("/secret", "s");
    const auto fd = sb.fds.allocate(OpenFile{"/secret", 0, 0});
    auto rd = make_event(Syscall::read, {fd, std::int64_t{10}});
    CHECK(cond("testforfd", {std::int64_t{0}, std::string("/secret")}, rd, sb) == 1);
    auto other = make_event(Syscall::read, {std::int64_t{99}, std::int64_t{10}});
    CHECK(cond("testforfd", {std::int64_t{0}, std::string("/secret")}, other, sb) == 0);
}

TEST_CASE("testforuid") {
    SandboxState sb;
    const auto gt0 = std::vector<Value>{std::string(">"), std::int64_t{0}};
    CHECK(cond("testforuid", gt0, open_ev("/x", ctx_with(1000)), sb) == 1);
    CHECK(cond("testforuid", gt0, open_ev("/x", ctx_with(0)), sb) == 0);
    CHECK(cond("testforuid", {std::string("=="), std::int64_t{42}}, open_ev("/x", ctx_with(42)), sb) == 1);
}

TEST_CASE("every comparison agrees with an oracle over a grid") {
    SandboxState sb;
    for (const auto& op : test::cmp_ops()) {
        for (std::int64_t uid = 0; uid <= 4; ++uid) {
            for (std::int64_t v = -1; v <= 5; ++v) {
                const auto ev = open_ev("/x", ctx_with(uid));
                CHECK(cond("testforuid", {op, v}, ev, sb) == (test::oracle_cmp(uid, op, v) ? 1 : 0));
                CHECK(cond("ctxfield_cmp", {std::string("uid"), op, v}, ev, sb) ==
                      (test::oracle_cmp(uid, op, v) ? 1 : 0));
            }
        }
    }
}

TEST_CASE("ctxfield_cmp") {
    SandboxState sb;
    const auto pid42 = std::vector<Value>{std::string("pid"), std::string("=="), std::int64_t{42}};
    CHECK(cond("ctxfield_cmp", pid42, open_ev("/x", ctx_with(0, "bash", 42)), sb) == 1);
    CHECK(cond("ctxfield_cmp", pid42, open_ev("/x", ctx_with(0, "bash", 43)), sb) == 0);
    test::Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        CHECK(cond("ctxfield_cmp", {std::string("ssid"), std::string(">="), std::int64_t{0}}, test::random_open(rng),
                   sb) == 1);
    }
    CHECK(Condition::make("ctxfield_cmp", pid42).param_source() == ParamSource::task_context);
}

TEST_CASE("file_keyword") {
    SandboxState sb;
    sb.vfs.put_file("/ctl/mode", "mode=trap\n");
    const auto ev = open_ev("/x");
    CHECK(cond("file_keyword", {std::string("/ctl/mode"), std::string("trap")}, ev, sb) == 1);
    CHECK(cond("file_keyword", {std::string("/ctl/mode"), std::string("open")}, ev, sb) == 0);
    CHECK(cond("file_keyword", {std::string("/ctl/missing"), std::string("trap")}, ev, sb) == 0);
    CHECK(cond("file_keyword", {std::string("/ctl/mode"), std::string("")}, ev, sb) == 1);
    sb.vfs.put_file("/ctl/mode", "");
    CHECK(cond("file_keyword", {std::string("/ctl/mode"), std::string("")}, ev, sb) == 1);
    CHECK(Condition::make("file_keyword", {std::string("/a"), std::string("b")}).param_source() ==
          ParamSource::reactive);
}

TEST_CASE("scratch store builtins") {
    SandboxState sb;
    ActionRun a(open_ev("/x"), sb);
    CHECK(cond("store_cmp", {std::string("unset"), std::string("=="), std::int64_t{0}}, a.ev, sb) == 1);
    CHECK(a.run("store_set", {std::string("n"), std::int64_t{3}}) == 0);
    CHECK(cond("store_cmp", {std::string("n"), std::string("=="), std::int64_t{3}}, a.ev, sb) == 1);
    CHECK(a.run("store_add", {std::string("n"), std::int64_t{-5}}) == 0);
    CHECK(cond("store_cmp", {std::string("n"), std::string("<"), std::int64_t{0}}, a.ev, sb) == 1);
    CHECK(a.run("store_set", {std::string("s"), std::string("word")}) == 0);
    CHECK(a.run("store_add", {std::string("s"), std::int64_t{1}}) == 1);
    CHECK(cond("store_cmp", {std::string("s"), std::string("=="), std::int64_t{0}}, a.ev, sb) == 0);
}

TEST_CASE("manipulateparam rewrites the matched prefix") {
    const WildcardPattern m = *WildcardPattern::parse("/var/lib/mysql/*");
    CHECK(rewrite_prefix("/var/lib/mysql/ibdata1", m, "/honey/mysql/") == "/honey/mysql/ibdata1");
    CHECK_FALSE(rewrite_prefix("/var/log/syslog", m, "/honey/mysql/").has_value());
    CHECK(rewrite_prefix("/var/lib/mysql/", m, "/honey/mysql/") == "/honey/mysql/");
    const WildcardPattern no_slash = *WildcardPattern::parse("/var/lib/mysql*");
    CHECK(rewrite_prefix("/var/lib/mysql/x", no_slash, "/honey/mysql/") == "/honey/mysql/x");
    const WildcardPattern exact = *WildcardPattern::parse("/etc/passwd");
    CHECK(rewrite_prefix("/etc/passwd", exact, "/honey/passwd") == "/honey/passwd");

    SandboxState sb;
    ActionRun a(open_ev("/var/lib/mysql/ibdata1"), sb);
    CHECK(a.run("manipulateparam", {std::int64_t{0}, std::string("/var/lib/mysql/*"), std::string("/honey/mysql/")}) ==
          0);
    CHECK(a.ev.args[0] == Value{std::string("/honey/mysql/ibdata1")});
    CHECK(a.run("manipulateparam", {std::int64_t{5}, std::string("*"), std::string("x")}) == 1);
}

TEST_CASE("manipulateparam is idempotent when the replacement does not re-match") {
    test::Rng rng(9);
    const std::vector<std::string> prefixes = {"/var/lib/mysql/", "/a/", "/a", "/srv/data"};
    const std::vector<std::string> replacements = {"/honey/mysql/", "/b/", "/honey", "/h/"};
    for (int i = 0; i < 2000; ++i) {
        const auto& prefix = test::pick(rng, prefixes);
        const auto& repl = test::pick(rng, replacements);
        const auto m = *WildcardPattern::parse(prefix + "*");
        if (m.matches(repl)) {
            continue;
        }
        std::string subject = test::coin(rng) ? prefix : std::string("/other");
        for (int k = test::uniform(rng, 0, 3); k > 0; --k) {
            subject += test::coin(rng) ? "/x" : "y";
        }
        const auto once = rewrite_prefix(subject, m, repl).value_or(subject);
        const auto twice = rewrite_prefix(once, m, repl).value_or(once);
        CHECK(once == twice);
        if (m.matches(subject)) {
            CHECK(once.starts_with(repl.substr(0, repl.size() - (repl.back() == '/' ? 1 : 0))));
            CHECK(once.find("//") == std::string::npos);
        }
    }
}

TEST_CASE("log emits one record with the current args and result") {
    SandboxState sb;
    auto mem = std::make_shared<MemorySink>();
    sb.logs.add_sink(mem);
    ActionRun a(make_event(Syscall::write, {std::int64_t{3}, Blob{std::string(4096, 'q')}}, ctx_with(1000), 9), sb);
    a.ctx.result = 4096;
    CHECK(a.run("log") == 0);
    CHECK(a.run("log") == 0);
    REQUIRE(mem->lines().size() == 2);
    auto rec = parse_log_line(mem->lines()[0]);
    REQUIRE(rec);
    CHECK(rec->syscall == "write");
    CHECK(rec->seq == 9);
    CHECK(rec->uid == 1000);
    CHECK(rec->args_json == R"([3,{"len":4096}])");
    CHECK(rec->result == 4096);
    CHECK(a.ctx.log_records == 2);
}

TEST_CASE("a failing sink does not fail the action") {
    struct Throwing final : LogSink {
        void write(std::string_view) override { throw std::runtime_error("sink down"); }
    };
    SandboxState sb;
    sb.logs.add_sink(std::make_shared<Throwing>());
    ActionRun a(open_ev("/x"), sb);
    CHECK(a.run("log") == 0);
    REQUIRE(a.ctx.diagnostics.size() == 1);
    CHECK(a.ctx.diagnostics[0].find("sink down") != std::string::npos);
}

TEST_CASE("call_orig returns the syscall result as the result slot") {
    SandboxState sb;
    sb.vfs.put_file("/honey/mysql/ibdata1", "x");
    ActionRun ok(open_ev("/honey/mysql/ibdata1"), sb);
    CHECK(ok.run("call_orig") == 0);
    CHECK(ok.ctx.result == 3);
    ActionRun missing(open_ev("/nope"), sb);
    CHECK(missing.run("call_orig") == 0);
    CHECK(missing.ctx.result == -2);
    ActionRun uid(make_event(Syscall::getuid, {}, ctx_with(1234)), sb);
    CHECK(uid.run("call_orig") == 0);
    CHECK(uid.ctx.result == 1234);
}

TEST_CASE("block uses the errno table or an explicit value") {
    SandboxState sb;
    sb.vfs.put_file("/apate.log", "secret");
    ActionRun a(make_event(Syscall::unlink, {std::string("/apate.log")}), sb);
    CHECK(a.run("block") == 0);
    CHECK(a.ctx.blocked);
    CHECK(a.ctx.result == -13);
    CHECK(sb.vfs.is_file("/apate.log"));

    ActionRun b(open_ev("/x"), sb);
    CHECK(b.run("block", {std::int64_t{-1}}) == 0);
    CHECK(b.ctx.result == -1);
    ActionRun c(open_ev("/x"), sb);
    CHECK(c.run("block", {std::int64_t{2}}) == 0);
    CHECK(c.ctx.result == -2);
}

TEST_CASE("hide_entry filters getdents output") {
    SandboxState sb;
    sb.vfs.put_file("/var/log/.ap.log", "");
    sb.vfs.put_file("/var/log/syslog", "");
    ActionRun a(make_event(Syscall::getdents, {std::string("/var/log")}), sb);
    CHECK(a.run("call_orig") == 0);
    CHECK(a.ctx.result == 2);
    CHECK(a.run("hide_entry", {std::string(".ap.log")}) == 0);
    CHECK(a.ctx.result == 1);
    CHECK(a.ctx.output.entries == std::vector<std::string>{"syslog"});
}

TEST_CASE("jump outside the chain fails") {
    SandboxState sb;
    ActionRun a(open_ev("/x"), sb);
    a.ctx.chain_length = 3;
    CHECK(a.run("jump", {std::int64_t{2}}) == 0);
    CHECK(a.ctx.jump_target == 2u);
    CHECK(a.run("jump", {std::int64_t{5}}) == 1);
}

TEST_CASE("emergency_exit blocks with the table value") {
    SandboxState sb;
    ActionRun a(open_ev("/x"), sb);
    CHECK(a.run("emergency_exit") == 0);
    CHECK(a.ctx.blocked);
    CHECK(a.ctx.emergency);
    CHECK(a.ctx.result == -13);
}
