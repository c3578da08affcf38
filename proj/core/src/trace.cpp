#include "apate/trace.hpp"

#include <json.hpp>

namespace apate {

namespace {

using nlohmann::json;

Value decode_arg(const json& j, ArgKind kind, std::size_t line, std::size_t index) {
    const auto fail = [&](const std::string& what) -> Value {
        throw TraceError(line, "argument " + std::to_string(index) + ": " + what);
    };
    switch (kind) {
    case ArgKind::integer:
        if (!j.is_number_integer()) {
            return fail("expected an integer");
        }
        return j.get<std::int64_t>();
    case ArgKind::string:
        if (!j.is_string()) {
            return fail("expected a string");
        }
        return j.get<std::string>();
    case ArgKind::blob:
        if (j.is_object() && j.size() == 1 && j.contains("len") && j["len"].is_number_unsigned()) {
            return Blob{std::string(j["len"].get<std::size_t>(), '\0')};
        }
        if (j.is_object() && j.size() == 1 && j.contains("data") && j["data"].is_string()) {
            return Blob{j["data"].get<std::string>()};
        }
        return fail("expected {\"len\":n} or {\"data\":\"...\"}");
    }
    return fail("unknown argument kind");
}

TaskContext decode_ctx(const json& j, std::size_t line) {
    TaskContext ctx;
    if (!j.is_object()) {
        throw TraceError(line, "ctx must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "pid" || key == "uid" || key == "ssid") {
            if (!value.is_number_integer()) {
                throw TraceError(line, "ctx." + key + " must be an integer");
            }
            (key == "pid" ? ctx.pid : key == "uid" ? ctx.uid : ctx.ssid) = value.get<std::int64_t>();
        } else if (key == "pname" || key == "parent_pname") {
            if (!value.is_string()) {
                throw TraceError(line, "ctx." + key + " must be a string");
            }
            (key == "pname" ? ctx.pname : ctx.parent_pname) = value.get<std::string>();
        } else {
            throw TraceError(line, "unknown ctx field '" + key + "'");
        }
    }
    return ctx;
}

json disposition_json(const Disposition& d) {
    json j;
    j["seq"] = d.seq;
    j["syscall"] = std::string(syscall_name(d.syscall));
    j["matched_rules"] = d.matched_rules;
    j["result"] = d.result;
    j["blocked"] = d.blocked;
    j["original_executed"] = d.original_executed;
    j["manipulated_args"] = json::parse(args_to_json(d.manipulated_args));
    j["conditions_evaluated"] = d.conditions_evaluated;
    j["steps"] = d.steps;
    j["log_records"] = d.log_records;
    if (d.failure) {
        j["failure"] = {{"rule", d.failure->rule}, {"action", d.failure->action_index}, {"status", d.failure->status}};
    } else {
        j["failure"] = nullptr;
    }
    j["budget_exhausted"] = d.budget_exhausted;
    j["emergency_exit"] = d.emergency_exit;
    if (d.syscall == Syscall::read) {
        j["output"] = {{"data", d.output.data}};
    } else if (d.syscall == Syscall::getdents) {
        j["output"] = {{"entries", d.output.entries}};
    }
    j["diagnostics"] = d.diagnostics;
    return j;
}

} // namespace

std::vector<SyscallEvent> parse_trace(std::string_view text) {
    std::vector<SyscallEvent> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw TraceError(line_no, e.what());
        }
        if (!j.is_object()) {
            throw TraceError(line_no, "event must be a JSON object");
        }
        for (const auto& [key, _] : j.items()) {
            if (key != "seq" && key != "syscall" && key != "args" && key != "ctx") {
                throw TraceError(line_no, "unknown field '" + key + "'");
            }
        }
        if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
            throw TraceError(line_no, "seq must be a non-negative integer");
        }
        if (!j.contains("syscall") || !j["syscall"].is_string()) {
            throw TraceError(line_no, "syscall must be a string");
        }
        SyscallEvent ev;
        ev.seq = j["seq"].get<std::uint64_t>();
        if (!out.empty() && ev.seq <= out.back().seq) {
            throw TraceError(line_no, "seq must strictly increase");
        }
        const auto sc = syscall_from_name(j["syscall"].get<std::string>());
        if (!sc) {
            throw TraceError(line_no, "unknown syscall '" + j["syscall"].get<std::string>() + "'");
        }
        ev.syscall = *sc;
        const auto sig = syscall_signature(*sc);
        if (j.contains("args")) {
            const auto& args = j["args"];
            if (!args.is_array()) {
                throw TraceError(line_no, "args must be an array");
            }
            if (args.size() > sig.size()) {
                throw TraceError(line_no, "too many arguments for " + std::string(syscall_name(*sc)));
            }
            for (std::size_t i = 0; i < args.size(); ++i) {
                ev.args.push_back(decode_arg(args[i], sig[i].kind, line_no, i));
            }
        }
        if (j.contains("ctx")) {
            ev.ctx = decode_ctx(j["ctx"], line_no);
        }
        fill_default_args(ev);
        if (auto problem = validate(ev)) {
            throw TraceError(line_no, *problem);
        }
        out.push_back(std::move(ev));
    }
    return out;
}

std::string event_to_json(const SyscallEvent& ev) {
    json j;
    j["seq"] = ev.seq;
    j["syscall"] = std::string(syscall_name(ev.syscall));
    json args = json::array();
    for (const auto& a : ev.args) {
        if (const auto* blob = std::get_if<Blob>(&a)) {
            const bool zeros = blob->bytes.find_first_not_of('\0') == std::string::npos;
            args.push_back(zeros ? json{{"len", blob->bytes.size()}} : json{{"data", blob->bytes}});
        } else if (const auto* n = std::get_if<std::int64_t>(&a)) {
            args.push_back(*n);
        } else {
            args.push_back(std::get<std::string>(a));
        }
    }
    j["args"] = std::move(args);
    j["ctx"] = {{"pid", ev.ctx.pid},
                {"uid", ev.ctx.uid},
                {"ssid", ev.ctx.ssid},
                {"pname", ev.ctx.pname},
                {"parent_pname", ev.ctx.parent_pname}};
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Report replay_trace(const RuleProgram& program, std::span<const SyscallEvent> trace, SandboxState& sandbox,
                    const EngineOptions& options) {
    Report report;
    for (const auto& ev : trace) {
        auto d = dispatch(program, ev, sandbox, options);
        report.total_conditions += d.conditions_evaluated;
        report.log_records += d.log_records;
        for (const auto& msg : d.diagnostics) {
            report.diagnostics.messages.push_back("seq " + std::to_string(d.seq) + ": " + msg);
        }
        const bool halt = d.emergency_exit;
        report.events.push_back(std::move(d));
        if (halt) {
            report.halted = true;
            break;
        }
    }
    sandbox.logs.flush();
    report.diagnostics.dropped = sandbox.logs.dropped();
    report.vfs_digest = sandbox.vfs.digest();
    return report;
}

Report replay_trace(const RuleProgram& program, std::span<const SyscallEvent> trace, VirtualFS vfs) {
    SandboxState sandbox;
    sandbox.vfs = std::move(vfs);
    return replay_trace(program, trace, sandbox);
}

std::string report_to_json(const Report& report) {
    json j;
    json events = json::array();
    for (const auto& d : report.events) {
        events.push_back(disposition_json(d));
    }
    j["events"] = std::move(events);
    j["event_count"] = report.events.size();
    j["total_conditions"] = report.total_conditions;
    j["log_records"] = report.log_records;
    j["vfs_digest"] = report.vfs_digest;
    j["halted"] = report.halted;
    j["diagnostics"] = {{"dropped", report.diagnostics.dropped}, {"messages", report.diagnostics.messages}};
    return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

} // namespace apate
