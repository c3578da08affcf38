#include "apate/wildcard.hpp"

namespace apate {

std::optional<WildcardPattern> WildcardPattern::parse(std::string_view text) {
    const auto star = text.find('*');
    WildcardPattern p;
    if (star == std::string_view::npos) {
        p.prefix_ = std::string(text);
        return p;
    }
    if (star != text.size() - 1) {
        return std::nullopt;
    }
    p.prefix_ = std::string(text.substr(0, star));
    p.tail_star_ = true;
    return p;
}

bool WildcardPattern::matches(std::string_view subject) const {
    if (tail_star_) {
        return subject.starts_with(prefix_);
    }
    return subject == prefix_;
}

} // namespace apate
