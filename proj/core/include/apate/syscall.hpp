#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace apate {

/// The eleven hooked syscalls.
enum class Syscall : std::uint8_t {
    open,
    close,
    read,
    write,
    unlink,
    execve,
    getpid,
    getuid,
    mkdir,
    rmdir,
    getdents,
};

inline constexpr std::size_t kSyscallCount = 11;

inline constexpr std::array<Syscall, kSyscallCount> kAllSyscalls = {
    Syscall::open,   Syscall::close,  Syscall::read,   Syscall::write, Syscall::unlink,  Syscall::execve,
    Syscall::getpid, Syscall::getuid, Syscall::mkdir,  Syscall::rmdir, Syscall::getdents,
};

/// Trace-level name, e.g. "open".
std::string_view syscall_name(Syscall sc);

/// Hook name used by the configuration language, e.g. "sys_open".
std::string_view hook_name(Syscall sc);

/// Accepts both "open" and "sys_open".
std::optional<Syscall> syscall_from_name(std::string_view name);

enum class ArgKind : std::uint8_t { string, integer, blob };

struct ArgSpec {
    ArgKind kind;
    bool optional = false; // trailing optional arguments get a default when parsed
};

/// Declared argument list for a syscall.
std::span<const ArgSpec> syscall_signature(Syscall sc);

inline std::size_t to_index(Syscall sc) { return static_cast<std::size_t>(sc); }

/// Negative errno values returned by the sandbox.
namespace err {
inline constexpr std::int64_t perm = -1;
inline constexpr std::int64_t noent = -2;
inline constexpr std::int64_t badf = -9;
inline constexpr std::int64_t acces = -13;
inline constexpr std::int64_t busy = -16;
inline constexpr std::int64_t exist = -17;
inline constexpr std::int64_t notdir = -20;
inline constexpr std::int64_t isdir = -21;
inline constexpr std::int64_t inval = -22;
inline constexpr std::int64_t notempty = -39;
} // namespace err

/// Linux open(2) flag values understood by the sandbox.
namespace open_flags {
inline constexpr std::int64_t rdonly = 0;
inline constexpr std::int64_t wronly = 1;
inline constexpr std::int64_t rdwr = 2;
inline constexpr std::int64_t accmode = 3;
inline constexpr std::int64_t creat = 0100;
inline constexpr std::int64_t trunc = 01000;
inline constexpr std::int64_t append = 02000;
} // namespace open_flags

} // namespace apate
