#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>

namespace apate {

/// Payload of a write. Traces describe it by length only; the bytes travel
/// with the event so a copy workload moves real data through the sandbox.
struct Blob {
    std::string bytes;

    friend bool operator==(const Blob&, const Blob&) = default;
};

/// A syscall argument or a builtin literal. Builtin literals are never blobs.
using Value = std::variant<std::int64_t, std::string, Blob>;

/// String form of a value as seen by pattern conditions.
std::string render(const Value& value);

/// Compact JSON text of an argument list; blobs become {"len":n}.
std::string args_to_json(std::span<const Value> args);

/// Compact JSON text of a literal list (strings and integers).
std::string literals_to_json(std::span<const Value> literals);

inline bool is_int(const Value& v) { return std::holds_alternative<std::int64_t>(v); }
inline bool is_string(const Value& v) { return std::holds_alternative<std::string>(v); }

} // namespace apate
