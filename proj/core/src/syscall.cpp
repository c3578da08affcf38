#include "apate/event.hpp"
#include "apate/syscall.hpp"

namespace apate {

namespace {

constexpr std::array<std::string_view, kSyscallCount> kNames = {
    "open", "close", "read", "write", "unlink", "execve", "getpid", "getuid", "mkdir", "rmdir", "getdents",
};

constexpr std::array<std::string_view, kSyscallCount> kHookNames = {
    "sys_open",   "sys_close",  "sys_read",   "sys_write", "sys_unlink", "sys_execve",
    "sys_getpid", "sys_getuid", "sys_mkdir",  "sys_rmdir", "sys_getdents",
};

constexpr ArgSpec kPathArg{ArgKind::string};
constexpr ArgSpec kFdArg{ArgKind::integer};

constexpr std::array<ArgSpec, 2> kOpenSig{kPathArg, ArgSpec{ArgKind::integer, true}};
constexpr std::array<ArgSpec, 1> kFdSig{kFdArg};
constexpr std::array<ArgSpec, 2> kReadSig{kFdArg, ArgSpec{ArgKind::integer}};
constexpr std::array<ArgSpec, 2> kWriteSig{kFdArg, ArgSpec{ArgKind::blob}};
constexpr std::array<ArgSpec, 1> kPathSig{kPathArg};
constexpr std::array<ArgSpec, 2> kExecveSig{kPathArg, ArgSpec{ArgKind::string, true}};

} // namespace

std::string_view syscall_name(Syscall sc) { return kNames[to_index(sc)]; }

std::string_view hook_name(Syscall sc) { return kHookNames[to_index(sc)]; }

std::optional<Syscall> syscall_from_name(std::string_view name) {
    for (auto sc : kAllSyscalls) {
        if (name == kNames[to_index(sc)] || name == kHookNames[to_index(sc)]) {
            return sc;
        }
    }
    return std::nullopt;
}

std::span<const ArgSpec> syscall_signature(Syscall sc) {
    switch (sc) {
    case Syscall::open: return kOpenSig;
    case Syscall::close: return kFdSig;
    case Syscall::read: return kReadSig;
    case Syscall::write: return kWriteSig;
    case Syscall::execve: return kExecveSig;
    case Syscall::unlink:
    case Syscall::mkdir:
    case Syscall::rmdir:
    case Syscall::getdents: return kPathSig;
    case Syscall::getpid:
    case Syscall::getuid: return {};
    }
    return {};
}

std::optional<std::string> validate(const TaskContext& ctx) {
    if (ctx.pid < 1) {
        return "pid must be >= 1";
    }
    if (ctx.uid < 0) {
        return "uid must be >= 0";
    }
    if (ctx.ssid < 0) {
        return "ssid must be >= 0";
    }
    if (ctx.pname.empty() || ctx.parent_pname.empty()) {
        return "process names must be non-empty";
    }
    return std::nullopt;
}

namespace {

bool kind_matches(const Value& v, ArgKind kind) {
    switch (kind) {
    case ArgKind::string: return std::holds_alternative<std::string>(v);
    case ArgKind::integer: return std::holds_alternative<std::int64_t>(v);
    case ArgKind::blob: return std::holds_alternative<Blob>(v);
    }
    return false;
}

std::string_view kind_name(ArgKind kind) {
    switch (kind) {
    case ArgKind::string: return "string";
    case ArgKind::integer: return "integer";
    case ArgKind::blob: return "payload";
    }
    return "?";
}

} // namespace

std::optional<std::string> validate(const SyscallEvent& ev) {
    if (auto bad = validate(ev.ctx)) {
        return bad;
    }
    const auto sig = syscall_signature(ev.syscall);
    if (ev.args.size() != sig.size()) {
        return std::string(syscall_name(ev.syscall)) + " takes " + std::to_string(sig.size()) + " argument(s), got " +
               std::to_string(ev.args.size());
    }
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (!kind_matches(ev.args[i], sig[i].kind)) {
            return "argument " + std::to_string(i) + " of " + std::string(syscall_name(ev.syscall)) +
                   " must be a " + std::string(kind_name(sig[i].kind));
        }
    }
    return std::nullopt;
}

void fill_default_args(SyscallEvent& ev) {
    const auto sig = syscall_signature(ev.syscall);
    for (std::size_t i = ev.args.size(); i < sig.size(); ++i) {
        if (!sig[i].optional) {
            return;
        }
        if (sig[i].kind == ArgKind::integer) {
            ev.args.emplace_back(std::int64_t{0});
        } else {
            ev.args.emplace_back(std::string{});
        }
    }
}

SyscallEvent make_event(Syscall sc, std::vector<Value> args, TaskContext ctx, std::uint64_t seq) {
    SyscallEvent ev{seq, sc, std::move(args), std::move(ctx)};
    fill_default_args(ev);
    return ev;
}

std::int64_t default_error(Syscall sc, const TaskContext& ctx) {
    switch (sc) {
    case Syscall::open:
    case Syscall::mkdir:
    case Syscall::rmdir:
    case Syscall::unlink:
    case Syscall::execve: return err::acces;
    case Syscall::read:
    case Syscall::write:
    case Syscall::getdents:
    case Syscall::close: return err::badf;
    case Syscall::getpid: return ctx.pid;
    case Syscall::getuid: return ctx.uid;
    }
    return err::acces;
}

} // namespace apate
