#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apate/syscall.hpp"
#include "apate/value.hpp"

namespace apate {

/// Identity of the task issuing a syscall.
struct TaskContext {
    std::int64_t pid = 1;
    std::int64_t uid = 0;
    std::int64_t ssid = 0;
    std::string pname = "init";
    std::string parent_pname = "init";

    friend bool operator==(const TaskContext&, const TaskContext&) = default;
};

/// One intercepted syscall invocation.
struct SyscallEvent {
    std::uint64_t seq = 0;
    Syscall syscall = Syscall::getpid;
    std::vector<Value> args;
    TaskContext ctx;

    friend bool operator==(const SyscallEvent&, const SyscallEvent&) = default;
};

/// Describes the first violated invariant, if any.
std::optional<std::string> validate(const TaskContext& ctx);

/// Checks the context and that args match the syscall's declared signature
/// exactly (optional arguments already filled in).
std::optional<std::string> validate(const SyscallEvent& ev);

/// Appends defaults for omitted optional trailing arguments.
void fill_default_args(SyscallEvent& ev);

/// Convenience constructor that fills defaults.
SyscallEvent make_event(Syscall sc, std::vector<Value> args, TaskContext ctx = {}, std::uint64_t seq = 0);

/// The syscall-dependent error: EACCES for path syscalls, EBADF for fd
/// syscalls, and the true value for getpid/getuid which cannot fail.
std::int64_t default_error(Syscall sc, const TaskContext& ctx);

} // namespace apate
