#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apate/event.hpp"
#include "apate/log.hpp"
#include "apate/scratch_store.hpp"
#include "apate/vfs.hpp"

namespace apate {

struct OpenFile {
    std::string path;
    std::uint64_t offset = 0;
    std::int64_t flags = 0;

    friend bool operator==(const OpenFile&, const OpenFile&) = default;
};

/// Open descriptors; allocation always picks the lowest free fd >= 3.
class FdTable {
public:
    static constexpr std::int64_t kFirstFd = 3;

    std::int64_t allocate(OpenFile file);
    OpenFile* find(std::int64_t fd);
    const OpenFile* find(std::int64_t fd) const;
    bool release(std::int64_t fd);
    std::size_t size() const { return open_.size(); }

    friend bool operator==(const FdTable&, const FdTable&) = default;

private:
    std::map<std::int64_t, OpenFile> open_;
};

/// Data a syscall hands back besides its integer result: the bytes of a read
/// and the names listed by getdents.
struct SyscallOutput {
    std::string data;
    std::vector<std::string> entries;

    friend bool operator==(const SyscallOutput&, const SyscallOutput&) = default;
};

/// An execve attempt; no process is ever spawned.
struct ExecRecord {
    std::uint64_t seq = 0;
    std::string path;
    std::string argv;
    std::int64_t result = 0;

    friend bool operator==(const ExecRecord&, const ExecRecord&) = default;
};

/// The world hooked syscalls act upon. One instance belongs to one event
/// stream.
struct SandboxState {
    VirtualFS vfs;
    FdTable fds;
    ScratchStore store;
    std::vector<ExecRecord> exec_log;
    LogHub logs;
    /// When set, every log line is also appended to this VFS file, bypassing
    /// the hooks.
    std::optional<std::string> vfs_log_path;

    /// Emits through the hub and mirrors into the VFS when configured.
    void write_log(LogRecord record);

    /// Compares everything a syscall can change (VFS, fds, store, exec log).
    bool same_world(const SandboxState& other) const;
};

/// The original syscall. Errors are negative results; never throws.
std::int64_t exec_syscall(SandboxState& sandbox, const SyscallEvent& ev, SyscallOutput* out = nullptr);

} // namespace apate
