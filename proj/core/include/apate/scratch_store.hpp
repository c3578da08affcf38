#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

namespace apate {

/// Unbounded key/value cells shared by every rule of one sandbox. Unset keys
/// read as integer 0.
class ScratchStore {
public:
    using Cell = std::variant<std::int64_t, std::string>;

    Cell get(const std::string& key) const;
    void set(const std::string& key, Cell value);

    /// False when the cell holds a string.
    bool add(const std::string& key, std::int64_t delta);

    std::size_t size() const { return cells_.size(); }
    const std::map<std::string, Cell, std::less<>>& cells() const { return cells_; }

    friend bool operator==(const ScratchStore&, const ScratchStore&) = default;

private:
    std::map<std::string, Cell, std::less<>> cells_;
};

} // namespace apate
