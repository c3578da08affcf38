#include "apate/vfs.hpp"

#include <cstdio>
#include <sstream>

namespace apate {

std::optional<std::string> normalize_path(std::string_view path) {
    if (path.empty() || path.front() != '/') {
        return std::nullopt;
    }
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        auto next = path.find('/', pos);
        if (next == std::string_view::npos) {
            next = path.size();
        }
        const auto part = path.substr(pos, next - pos);
        if (part.empty() || part == ".") {
            // skip
        } else if (part == "..") {
            if (!parts.empty()) {
                parts.pop_back();
            }
        } else {
            parts.push_back(part);
        }
        pos = next + 1;
    }
    if (parts.empty()) {
        return std::string("/");
    }
    std::string out;
    for (auto part : parts) {
        out += '/';
        out += part;
    }
    return out;
}

std::string parent_path(std::string_view normalized) {
    const auto slash = normalized.rfind('/');
    if (slash == 0 || slash == std::string_view::npos) {
        return "/";
    }
    return std::string(normalized.substr(0, slash));
}

std::string base_name(std::string_view normalized) {
    const auto slash = normalized.rfind('/');
    return std::string(slash == std::string_view::npos ? normalized : normalized.substr(slash + 1));
}

namespace {

std::string child_prefix(const std::string& dir) { return dir == "/" ? dir : dir + "/"; }

} // namespace

VirtualFS::VirtualFS() { nodes_.emplace("/", Node{NodeType::directory, {}}); }

bool VirtualFS::exists(const std::string& path) const { return nodes_.contains(path); }

bool VirtualFS::is_directory(const std::string& path) const {
    auto it = nodes_.find(path);
    return it != nodes_.end() && it->second.type == NodeType::directory;
}

bool VirtualFS::is_file(const std::string& path) const {
    auto it = nodes_.find(path);
    return it != nodes_.end() && it->second.type == NodeType::file;
}

const std::string* VirtualFS::file_content(const std::string& path) const {
    auto it = nodes_.find(path);
    if (it == nodes_.end() || it->second.type != NodeType::file) {
        return nullptr;
    }
    return &it->second.content;
}

std::string* VirtualFS::mutable_file_content(const std::string& path) {
    auto it = nodes_.find(path);
    if (it == nodes_.end() || it->second.type != NodeType::file) {
        return nullptr;
    }
    return &it->second.content;
}

std::int64_t VirtualFS::make_directory(const std::string& path) {
    if (exists(path)) {
        return -17;
    }
    const auto parent = parent_path(path);
    if (!exists(parent)) {
        return -2;
    }
    if (!is_directory(parent)) {
        return -20;
    }
    nodes_.emplace(path, Node{NodeType::directory, {}});
    return 0;
}

std::int64_t VirtualFS::create_file(const std::string& path, std::string content) {
    if (exists(path)) {
        return -17;
    }
    const auto parent = parent_path(path);
    if (!exists(parent)) {
        return -2;
    }
    if (!is_directory(parent)) {
        return -20;
    }
    nodes_.emplace(path, Node{NodeType::file, std::move(content)});
    return 0;
}

std::int64_t VirtualFS::remove_file(const std::string& path) {
    auto it = nodes_.find(path);
    if (it == nodes_.end()) {
        return -2;
    }
    if (it->second.type == NodeType::directory) {
        return -21;
    }
    nodes_.erase(it);
    return 0;
}

bool VirtualFS::has_children(const std::string& path) const {
    const auto prefix = child_prefix(path);
    auto it = nodes_.upper_bound(prefix);
    if (path == "/") {
        return nodes_.size() > 1;
    }
    return it != nodes_.end() && it->first.starts_with(prefix);
}

std::int64_t VirtualFS::remove_directory(const std::string& path) {
    auto it = nodes_.find(path);
    if (it == nodes_.end()) {
        return -2;
    }
    if (it->second.type != NodeType::directory) {
        return -20;
    }
    if (has_children(path)) {
        return -39;
    }
    if (path == "/") {
        return -16;
    }
    nodes_.erase(it);
    return 0;
}

std::vector<std::string> VirtualFS::list_directory(const std::string& path) const {
    std::vector<std::string> names;
    const auto prefix = child_prefix(path);
    for (auto it = nodes_.upper_bound(prefix); it != nodes_.end() && it->first.starts_with(prefix); ++it) {
        const std::string_view rest = std::string_view(it->first).substr(prefix.size());
        if (!rest.empty() && rest.find('/') == std::string_view::npos) {
            names.emplace_back(rest);
        }
    }
    return names;
}

std::vector<std::string> VirtualFS::directories() const {
    std::vector<std::string> dirs;
    for (const auto& [path, node] : nodes_) {
        if (node.type == NodeType::directory) {
            dirs.push_back(path);
        }
    }
    return dirs;
}

bool VirtualFS::ensure_directories(const std::string& path) {
    if (path == "/" || is_directory(path)) {
        return true;
    }
    if (exists(path) || !ensure_directories(parent_path(path))) {
        return false;
    }
    nodes_.emplace(path, Node{NodeType::directory, {}});
    return true;
}

bool VirtualFS::put_file(const std::string& path, std::string content) {
    if (path == "/" || is_directory(path) || !ensure_directories(parent_path(path))) {
        return false;
    }
    nodes_.insert_or_assign(path, Node{NodeType::file, std::move(content)});
    return true;
}

bool VirtualFS::append_file(const std::string& path, std::string_view data) {
    auto it = nodes_.find(path);
    if (it == nodes_.end()) {
        return put_file(path, std::string(data));
    }
    if (it->second.type != NodeType::file) {
        return false;
    }
    it->second.content.append(data);
    return true;
}

std::string VirtualFS::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [path, node] : nodes_) {
        mix(node.type == NodeType::directory ? "D" : "F");
        mix(path);
        mix(std::string_view("\0", 1));
        mix(std::to_string(node.content.size()));
        mix(std::string_view("\0", 1));
        mix(node.content);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool VirtualFS::check_invariants() const {
    auto root = nodes_.find("/");
    if (root == nodes_.end() || root->second.type != NodeType::directory) {
        return false;
    }
    for (const auto& [path, node] : nodes_) {
        if (path == "/") {
            continue;
        }
        const auto norm = normalize_path(path);
        if (!norm || *norm != path) {
            return false;
        }
        if (!is_directory(parent_path(path))) {
            return false;
        }
        if (node.type == NodeType::directory && !node.content.empty()) {
            return false;
        }
    }
    return true;
}

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string checked_path(std::string_view raw, std::size_t line) {
    auto norm = normalize_path(raw);
    if (!norm) {
        throw ManifestError(line, "path must be absolute: " + std::string(raw));
    }
    return *norm;
}

} // namespace

VirtualFS vfs_from_manifest(std::string_view manifest) {
    VirtualFS vfs;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < manifest.size()) {
        auto eol = manifest.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = manifest.size();
        }
        std::string_view line = manifest.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (line.size() < 3 || line[1] != ' ') {
            throw ManifestError(line_no, "expected 'D <path>' or 'F <path> <len> <fill>'");
        }
        const char tag = line[0];
        std::string_view rest = line.substr(2);
        if (tag == 'D') {
            if (rest.find(' ') != std::string_view::npos) {
                throw ManifestError(line_no, "directory line takes exactly one path");
            }
            const auto path = checked_path(rest, line_no);
            if (!vfs.ensure_directories(path)) {
                throw ManifestError(line_no, "a file is in the way of " + path);
            }
            continue;
        }
        if (tag != 'F') {
            throw ManifestError(line_no, std::string("unknown entry type '") + tag + "'");
        }
        const auto sp1 = rest.find(' ');
        if (sp1 == std::string_view::npos) {
            throw ManifestError(line_no, "file line needs a length and a fill");
        }
        const auto sp2 = rest.find(' ', sp1 + 1);
        if (sp2 == std::string_view::npos) {
            throw ManifestError(line_no, "file line needs a fill");
        }
        const auto path = checked_path(rest.substr(0, sp1), line_no);
        const auto len_text = rest.substr(sp1 + 1, sp2 - sp1 - 1);
        const auto fill = rest.substr(sp2 + 1);
        std::uint64_t length = 0;
        if (len_text.empty()) {
            throw ManifestError(line_no, "empty length");
        }
        for (char c : len_text) {
            if (c < '0' || c > '9') {
                throw ManifestError(line_no, "length must be a decimal integer");
            }
            length = length * 10 + static_cast<std::uint64_t>(c - '0');
            if (length > (1ULL << 32)) {
                throw ManifestError(line_no, "length too large");
            }
        }
        std::string content;
        if (!fill.empty() && fill.front() == '@') {
            content = std::string(fill.substr(1));
            if (content.size() != length) {
                throw ManifestError(line_no, "inline content has " + std::to_string(content.size()) +
                                                 " bytes, declared " + std::to_string(length));
            }
        } else {
            if (fill.size() != 2 || hex_digit(fill[0]) < 0 || hex_digit(fill[1]) < 0) {
                throw ManifestError(line_no, "fill must be one hex byte or @inline-string");
            }
            content.assign(length, static_cast<char>(hex_digit(fill[0]) * 16 + hex_digit(fill[1])));
        }
        if (!vfs.put_file(path, std::move(content))) {
            throw ManifestError(line_no, "cannot place a file at " + path);
        }
    }
    return vfs;
}

} // namespace apate
