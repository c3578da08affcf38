#pragma once

#include <cstdint>
#include <string>

#include "apate/program.hpp"

namespace apate {

struct CloakOptions {
    std::string log_path;
    /// Accepted for configuration symmetry. The cloak applies to every uid,
    /// this one included.
    std::int64_t admin_uid = 0;
};

/// Predefined rules hiding the honeypot's own log: open, unlink, read and
/// write on the log answer ENOENT, and getdents on its directory omits it.
/// Each is an exit rule. Throws std::invalid_argument on a relative path.
std::vector<std::pair<Syscall, RuleChain>> cloak_ruleset(const CloakOptions& options);

/// `user` with the cloak rules prepended to the chains of the cloaked
/// syscalls, so no user rule can run before them.
RuleProgram apply_cloak(const RuleProgram& user, const CloakOptions& options);

} // namespace apate
