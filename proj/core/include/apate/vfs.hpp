#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace apate {

/// Collapses duplicate separators and resolves "." and "..". Only absolute
/// paths normalize; anything else yields nullopt.
std::optional<std::string> normalize_path(std::string_view path);

/// Parent directory of a normalized path ("/" for top-level entries).
std::string parent_path(std::string_view normalized);

/// Final component of a normalized path.
std::string base_name(std::string_view normalized);

/// In-memory directory tree keyed by normalized absolute path.
///
/// Invariants: "/" always exists and is a directory; every entry's parent
/// exists and is a directory. All mutators take normalized paths and return
/// 0 or a negative errno.
class VirtualFS {
public:
    enum class NodeType : std::uint8_t { directory, file };

    VirtualFS();

    bool exists(const std::string& path) const;
    bool is_directory(const std::string& path) const;
    bool is_file(const std::string& path) const;

    const std::string* file_content(const std::string& path) const;
    std::string* mutable_file_content(const std::string& path);

    std::int64_t make_directory(const std::string& path);
    std::int64_t create_file(const std::string& path, std::string content = {});
    std::int64_t remove_file(const std::string& path);
    std::int64_t remove_directory(const std::string& path);

    /// Direct children of a directory, sorted lexicographically.
    std::vector<std::string> list_directory(const std::string& path) const;
    std::vector<std::string> directories() const;

    /// Create missing parents; used by manifests and internal log mirroring,
    /// never by hooked syscalls. Return false when a file is in the way.
    bool ensure_directories(const std::string& path);
    bool put_file(const std::string& path, std::string content);
    bool append_file(const std::string& path, std::string_view data);

    /// Stable FNV-1a digest over sorted (type, path, content) triples, hex.
    std::string digest() const;

    bool check_invariants() const;
    std::size_t entry_count() const { return nodes_.size(); }

    friend bool operator==(const VirtualFS&, const VirtualFS&) = default;

private:
    struct Node {
        NodeType type = NodeType::directory;
        std::string content;

        friend bool operator==(const Node&, const Node&) = default;
    };

    bool has_children(const std::string& path) const;

    std::map<std::string, Node, std::less<>> nodes_;
};

class ManifestError : public std::runtime_error {
public:
    ManifestError(std::size_t line, const std::string& what)
        : std::runtime_error("MalformedManifestLine(" + std::to_string(line) + "): " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Builds a VFS from manifest text. Lines are `D <path>` or
/// `F <path> <byte-length> <fill-byte-hex|@inline-string>`; blank lines and
/// lines starting with '#' are ignored.
VirtualFS vfs_from_manifest(std::string_view manifest);

} // namespace apate
