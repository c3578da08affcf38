#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace apate {

/// A literal with at most one trailing '*'. "P*" matches every string that
/// starts with P; a pattern without '*' matches only itself.
class WildcardPattern {
public:
    WildcardPattern() = default;

    /// nullopt when '*' appears anywhere but the final position.
    static std::optional<WildcardPattern> parse(std::string_view text);

    bool matches(std::string_view subject) const;

    const std::string& literal_prefix() const { return prefix_; }
    bool has_tail_star() const { return tail_star_; }
    std::string text() const { return tail_star_ ? prefix_ + "*" : prefix_; }

    friend bool operator==(const WildcardPattern&, const WildcardPattern&) = default;

private:
    std::string prefix_;
    bool tail_star_ = false;
};

} // namespace apate
