#include "apate/cloak.hpp"

#include <algorithm>

#include "apate/vfs.hpp"

namespace apate {

namespace {

Rule cloak_rule(std::string name, Condition guard, std::vector<Action> actions) {
    return Rule{std::move(name), ConditionBlock::neutral(std::move(guard)), ActionChain{std::move(actions)}, true, {}};
}

} // namespace

std::vector<std::pair<Syscall, RuleChain>> cloak_ruleset(const CloakOptions& options) {
    const auto path = normalize_path(options.log_path);
    if (!path || *path == "/") {
        throw std::invalid_argument("cloak log path must be an absolute file path: '" + options.log_path + "'");
    }
    const std::vector<Value> by_path{std::int64_t{0}, *path};
    const auto deny = [] { return std::vector<Action>{Action::make("block", {err::noent})}; };

    std::vector<std::pair<Syscall, RuleChain>> out;
    for (auto sc : {Syscall::open, Syscall::unlink}) {
        const std::string name = "#cloak_" + std::string(syscall_name(sc));
        out.emplace_back(sc, RuleChain{name, {cloak_rule(name, Condition::make("testforpath", by_path), deny())}});
    }
    for (auto sc : {Syscall::read, Syscall::write}) {
        const std::string name = "#cloak_" + std::string(syscall_name(sc));
        out.emplace_back(sc, RuleChain{name, {cloak_rule(name, Condition::make("testforfd", by_path), deny())}});
    }
    const std::vector<Value> dir{std::int64_t{0}, parent_path(*path)};
    out.emplace_back(Syscall::getdents,
                     RuleChain{"#cloak_getdents",
                               {cloak_rule("#cloak_getdents", Condition::make("testforpath", dir),
                                           {Action::make("call_orig"),
                                            Action::make("hide_entry", {base_name(*path)})})}});
    return out;
}

RuleProgram apply_cloak(const RuleProgram& user, const CloakOptions& options) {
    auto cloak = cloak_ruleset(options);
    ProgramBuilder builder;
    for (auto sc : kAllSyscalls) {
        const RuleChain* chain = user.chain_for(sc);
        auto it = std::find_if(cloak.begin(), cloak.end(), [sc](const auto& p) { return p.first == sc; });
        if (it == cloak.end()) {
            if (chain != nullptr) {
                builder.bind(sc, *chain);
            }
            continue;
        }
        RuleChain merged = it->second;
        if (chain != nullptr) {
            merged.name += "+" + chain->name;
            merged.rules.insert(merged.rules.end(), chain->rules.begin(), chain->rules.end());
        }
        builder.bind(sc, merged);
    }
    return builder.build();
}

} // namespace apate
