#include "apate/value.hpp"

#include <json.hpp>

namespace apate {

std::string render(const Value& value) {
    if (const auto* i = std::get_if<std::int64_t>(&value)) {
        return std::to_string(*i);
    }
    if (const auto* s = std::get_if<std::string>(&value)) {
        return *s;
    }
    return std::get<Blob>(value).bytes;
}

std::string args_to_json(std::span<const Value> args) {
    auto arr = nlohmann::json::array();
    for (const auto& v : args) {
        if (const auto* i = std::get_if<std::int64_t>(&v)) {
            arr.push_back(*i);
        } else if (const auto* s = std::get_if<std::string>(&v)) {
            arr.push_back(*s);
        } else {
            arr.push_back({{"len", std::get<Blob>(v).bytes.size()}});
        }
    }
    return arr.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string literals_to_json(std::span<const Value> literals) { return args_to_json(literals); }

} // namespace apate
