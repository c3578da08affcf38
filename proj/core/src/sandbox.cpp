#include "apate/sandbox.hpp"

#include <algorithm>
#include <cassert>

namespace apate {

std::int64_t FdTable::allocate(OpenFile file) {
    std::int64_t fd = kFirstFd;
    for (const auto& [used, _] : open_) {
        if (used != fd) {
            break;
        }
        ++fd;
    }
    open_.emplace(fd, std::move(file));
    return fd;
}

OpenFile* FdTable::find(std::int64_t fd) {
    auto it = open_.find(fd);
    return it == open_.end() ? nullptr : &it->second;
}

const OpenFile* FdTable::find(std::int64_t fd) const {
    auto it = open_.find(fd);
    return it == open_.end() ? nullptr : &it->second;
}

bool FdTable::release(std::int64_t fd) { return open_.erase(fd) == 1; }

void SandboxState::write_log(LogRecord record) {
    const auto line = logs.emit(std::move(record));
    if (vfs_log_path) {
        vfs.append_file(*vfs_log_path, line + "\n");
    }
}

bool SandboxState::same_world(const SandboxState& other) const {
    return vfs == other.vfs && fds == other.fds && store == other.store && exec_log == other.exec_log;
}

namespace {

const std::string* string_arg(const SyscallEvent& ev, std::size_t i) {
    return i < ev.args.size() ? std::get_if<std::string>(&ev.args[i]) : nullptr;
}

const std::int64_t* int_arg(const SyscallEvent& ev, std::size_t i) {
    return i < ev.args.size() ? std::get_if<std::int64_t>(&ev.args[i]) : nullptr;
}

bool readable(std::int64_t flags) { return (flags & open_flags::accmode) != open_flags::wronly; }
bool writable(std::int64_t flags) { return (flags & open_flags::accmode) != open_flags::rdonly; }

std::int64_t sys_open(SandboxState& sb, const SyscallEvent& ev) {
    const auto* raw = string_arg(ev, 0);
    const auto* flags_arg = int_arg(ev, 1);
    if (raw == nullptr) {
        return err::inval;
    }
    const std::int64_t flags = flags_arg != nullptr ? *flags_arg : 0;
    const auto path = normalize_path(*raw);
    if (!path) {
        return err::noent;
    }
    if (sb.vfs.is_directory(*path)) {
        if (writable(flags)) {
            return err::isdir;
        }
        return sb.fds.allocate(OpenFile{*path, 0, flags});
    }
    if (auto* content = sb.vfs.mutable_file_content(*path)) {
        if ((flags & open_flags::trunc) != 0 && writable(flags)) {
            content->clear();
        }
        return sb.fds.allocate(OpenFile{*path, 0, flags});
    }
    if ((flags & open_flags::creat) == 0) {
        return err::noent;
    }
    if (const auto rc = sb.vfs.create_file(*path); rc != 0) {
        return rc;
    }
    return sb.fds.allocate(OpenFile{*path, 0, flags});
}

std::int64_t sys_read(SandboxState& sb, const SyscallEvent& ev, SyscallOutput* out) {
    const auto* fd = int_arg(ev, 0);
    const auto* count = int_arg(ev, 1);
    if (fd == nullptr || count == nullptr || *count < 0) {
        return err::inval;
    }
    auto* file = sb.fds.find(*fd);
    if (file == nullptr || !readable(file->flags)) {
        return err::badf;
    }
    if (sb.vfs.is_directory(file->path)) {
        return err::isdir;
    }
    const auto* content = sb.vfs.file_content(file->path);
    if (content == nullptr) {
        return err::badf;
    }
    if (file->offset >= content->size()) {
        if (out != nullptr) {
            out->data.clear();
        }
        return 0;
    }
    const auto n = std::min<std::uint64_t>(static_cast<std::uint64_t>(*count), content->size() - file->offset);
    if (out != nullptr) {
        out->data.assign(*content, file->offset, n);
    }
    file->offset += n;
    return static_cast<std::int64_t>(n);
}

std::int64_t sys_write(SandboxState& sb, const SyscallEvent& ev) {
    const auto* fd = int_arg(ev, 0);
    const auto* payload = ev.args.size() > 1 ? std::get_if<Blob>(&ev.args[1]) : nullptr;
    if (fd == nullptr || payload == nullptr) {
        return err::inval;
    }
    auto* file = sb.fds.find(*fd);
    if (file == nullptr || !writable(file->flags)) {
        return err::badf;
    }
    auto* content = sb.vfs.mutable_file_content(file->path);
    if (content == nullptr) {
        return err::badf;
    }
    if ((file->flags & open_flags::append) != 0) {
        file->offset = content->size();
    }
    const auto& bytes = payload->bytes;
    if (file->offset > content->size()) {
        content->resize(file->offset, '\0');
    }
    if (file->offset == content->size()) {
        content->append(bytes);
    } else {
        const auto overlap = std::min<std::uint64_t>(bytes.size(), content->size() - file->offset);
        content->replace(file->offset, overlap, bytes);
    }
    file->offset += bytes.size();
    return static_cast<std::int64_t>(bytes.size());
}

template <typename Fn>
std::int64_t on_path(const SyscallEvent& ev, Fn&& fn) {
    const auto* raw = string_arg(ev, 0);
    if (raw == nullptr) {
        return err::inval;
    }
    const auto path = normalize_path(*raw);
    if (!path) {
        return err::noent;
    }
    return fn(*path);
}

std::int64_t sys_getdents(SandboxState& sb, const SyscallEvent& ev, SyscallOutput* out) {
    return on_path(ev, [&](const std::string& path) -> std::int64_t {
        if (!sb.vfs.exists(path)) {
            return err::noent;
        }
        if (!sb.vfs.is_directory(path)) {
            return err::notdir;
        }
        auto names = sb.vfs.list_directory(path);
        const auto n = static_cast<std::int64_t>(names.size());
        if (out != nullptr) {
            out->entries = std::move(names);
        }
        return n;
    });
}

std::int64_t sys_execve(SandboxState& sb, const SyscallEvent& ev) {
    const auto* argv = string_arg(ev, 1);
    const auto rc = on_path(ev, [&](const std::string& path) -> std::int64_t {
        return sb.vfs.is_file(path) ? 0 : err::noent;
    });
    const auto* raw = string_arg(ev, 0);
    sb.exec_log.push_back(ExecRecord{ev.seq, raw != nullptr ? *raw : std::string{}, argv != nullptr ? *argv : "", rc});
    return rc;
}

} // namespace

std::int64_t exec_syscall(SandboxState& sandbox, const SyscallEvent& ev, SyscallOutput* out) {
    std::int64_t rc = 0;
    switch (ev.syscall) {
    case Syscall::open: rc = sys_open(sandbox, ev); break;
    case Syscall::close: {
        const auto* fd = int_arg(ev, 0);
        rc = fd != nullptr && sandbox.fds.release(*fd) ? 0 : err::badf;
        break;
    }
    case Syscall::read: rc = sys_read(sandbox, ev, out); break;
    case Syscall::write: rc = sys_write(sandbox, ev); break;
    case Syscall::unlink:
        rc = on_path(ev, [&](const std::string& p) { return sandbox.vfs.remove_file(p); });
        break;
    case Syscall::mkdir:
        rc = on_path(ev, [&](const std::string& p) { return sandbox.vfs.make_directory(p); });
        break;
    case Syscall::rmdir:
        rc = on_path(ev, [&](const std::string& p) { return sandbox.vfs.remove_directory(p); });
        break;
    case Syscall::getdents: rc = sys_getdents(sandbox, ev, out); break;
    case Syscall::execve: rc = sys_execve(sandbox, ev); break;
    case Syscall::getpid: rc = ev.ctx.pid; break;
    case Syscall::getuid: rc = ev.ctx.uid; break;
    }
    assert(sandbox.vfs.check_invariants());
    return rc;
}

} // namespace apate
