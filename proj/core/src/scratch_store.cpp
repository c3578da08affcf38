#include "apate/scratch_store.hpp"

namespace apate {

ScratchStore::Cell ScratchStore::get(const std::string& key) const {
    if (auto it = cells_.find(key); it != cells_.end()) {
        return it->second;
    }
    return std::int64_t{0};
}

void ScratchStore::set(const std::string& key, Cell value) { cells_.insert_or_assign(key, std::move(value)); }

bool ScratchStore::add(const std::string& key, std::int64_t delta) {
    auto [it, inserted] = cells_.try_emplace(key, std::int64_t{0});
    auto* n = std::get_if<std::int64_t>(&it->second);
    if (n == nullptr) {
        return false;
    }
    *n += delta;
    return true;
}

} // namespace apate
