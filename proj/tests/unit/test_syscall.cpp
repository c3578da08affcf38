#include "catch_amalgamated.hpp"

#include <set>

#include "apate/event.hpp"
#include "apate/syscall.hpp"

using namespace apate;

TEST_CASE("eleven distinct hooks with both name forms") {
    std::set<std::string_view> names;
    for (auto sc : kAllSyscalls) {
        names.insert(syscall_name(sc));
        CHECK(syscall_from_name(syscall_name(sc)) == sc);
        CHECK(syscall_from_name(hook_name(sc)) == sc);
        CHECK(hook_name(sc) == "sys_" + std::string(syscall_name(sc)));
    }
    CHECK(names.size() == kSyscallCount);
    CHECK(names == std::set<std::string_view>{"open", "close", "read", "write", "unlink", "execve", "getpid",
                                              "getuid", "mkdir", "rmdir", "getdents"});
    CHECK_FALSE(syscall_from_name("sys_fork").has_value());
    CHECK_FALSE(syscall_from_name("").has_value());
}

TEST_CASE("errno table is total over the hooks") {
    TaskContext ctx;
    ctx.pid = 77;
    ctx.uid = 1000;
    for (auto sc : {Syscall::open, Syscall::mkdir, Syscall::rmdir, Syscall::unlink, Syscall::execve}) {
        CHECK(default_error(sc, ctx) == -13);
    }
    for (auto sc : {Syscall::read, Syscall::write, Syscall::getdents, Syscall::close}) {
        CHECK(default_error(sc, ctx) == -9);
    }
    CHECK(default_error(Syscall::getpid, ctx) == 77);
    CHECK(default_error(Syscall::getuid, ctx) == 1000);
}

TEST_CASE("make_event fills optional trailing arguments") {
    auto ev = make_event(Syscall::open, {std::string("/x")});
    REQUIRE(ev.args.size() == 2);
    CHECK(ev.args[1] == Value{std::int64_t{0}});
    CHECK_FALSE(validate(ev).has_value());

    auto ex = make_event(Syscall::execve, {std::string("/bin/sh")});
    REQUIRE(ex.args.size() == 2);
    CHECK(ex.args[1] == Value{std::string()});
}

TEST_CASE("validate rejects bad arity, kinds and contexts") {
    auto ev = make_event(Syscall::read, {std::int64_t{3}});
    CHECK(validate(ev).has_value());

    auto w = make_event(Syscall::write, {std::int64_t{3}, std::string("not a blob")});
    CHECK(validate(w).has_value());

    auto ok = make_event(Syscall::write, {std::int64_t{3}, Blob{"x"}});
    CHECK_FALSE(validate(ok).has_value());

    TaskContext bad;
    bad.pid = 0;
    CHECK(validate(bad).has_value());
    bad = {};
    bad.uid = -1;
    CHECK(validate(bad).has_value());
    bad = {};
    bad.ssid = -1;
    CHECK(validate(bad).has_value());
    bad = {};
    bad.pname.clear();
    CHECK(validate(bad).has_value());
    bad = {};
    bad.parent_pname.clear();
    CHECK(validate(bad).has_value());
    CHECK_FALSE(validate(TaskContext{}).has_value());
}

TEST_CASE("signatures match the documented arities") {
    CHECK(syscall_signature(Syscall::open).size() == 2);
    CHECK(syscall_signature(Syscall::close).size() == 1);
    CHECK(syscall_signature(Syscall::read).size() == 2);
    CHECK(syscall_signature(Syscall::write).size() == 2);
    CHECK(syscall_signature(Syscall::getpid).empty());
    CHECK(syscall_signature(Syscall::getuid).empty());
    CHECK(syscall_signature(Syscall::getdents).size() == 1);
}
