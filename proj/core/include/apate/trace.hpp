#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apate/engine.hpp"
#include "apate/program.hpp"
#include "apate/sandbox.hpp"

namespace apate {

class TraceError : public std::runtime_error {
public:
    TraceError(std::size_t line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// One JSON object per line:
/// {"seq":1,"syscall":"open","args":["/etc/passwd",0],"ctx":{"pid":..,"uid":..,"ssid":..,
///  "pname":"..","parent_pname":".."}}
/// Paths are strings, fds/counts/flags integers, write payloads {"len":n}
/// (zero bytes) or {"data":"..."}. Sequence numbers must strictly increase.
std::vector<SyscallEvent> parse_trace(std::string_view text);

std::string event_to_json(const SyscallEvent& ev);

struct ReportDiagnostics {
    std::uint64_t dropped = 0;
    std::vector<std::string> messages;
};

struct Report {
    std::vector<Disposition> events;
    std::uint64_t total_conditions = 0;
    std::uint64_t log_records = 0;
    std::string vfs_digest;
    bool halted = false; // an emergency exit ended the trace early
    ReportDiagnostics diagnostics;
};

Report replay_trace(const RuleProgram& program, std::span<const SyscallEvent> trace, SandboxState& sandbox,
                    const EngineOptions& options = {});
Report replay_trace(const RuleProgram& program, std::span<const SyscallEvent> trace, VirtualFS vfs);

std::string report_to_json(const Report& report);

} // namespace apate
