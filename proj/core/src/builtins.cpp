#include "apate/builtins.hpp"

#include <array>

#include "apate/vfs.hpp"

namespace apate {

std::optional<CmpOp> parse_cmp(std::string_view text) {
    if (text == "==") return CmpOp::eq;
    if (text == "!=") return CmpOp::ne;
    if (text == ">") return CmpOp::gt;
    if (text == "<") return CmpOp::lt;
    if (text == ">=") return CmpOp::ge;
    if (text == "<=") return CmpOp::le;
    return std::nullopt;
}

std::string_view cmp_text(CmpOp op) {
    switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
    case CmpOp::gt: return ">";
    case CmpOp::lt: return "<";
    case CmpOp::ge: return ">=";
    case CmpOp::le: return "<=";
    }
    return "?";
}

std::optional<CtxField> parse_ctx_field(std::string_view text) {
    if (text == "pid") return CtxField::pid;
    if (text == "uid") return CtxField::uid;
    if (text == "ssid") return CtxField::ssid;
    return std::nullopt;
}

std::size_t BuiltinSpec::min_arity() const {
    std::size_t n = 0;
    for (const auto& p : params) {
        if (!p.optional) {
            ++n;
        }
    }
    return n;
}

namespace {

using P = ParamType;
constexpr auto C = BuiltinKind::condition;
constexpr auto A = BuiltinKind::action;

const std::vector<BuiltinSpec>& registry() {
    static const std::vector<BuiltinSpec> specs = {
        {"always_true", C, {}, "c*: true for every event"},
        {"testforpname", C, {{P::pattern}}, "parent process name matches"},
        {"testforselfpname", C, {{P::pattern}}, "process name matches"},
        {"testforparam", C, {{P::integer}, {P::pattern}}, "syscall argument, rendered as text, matches"},
        {"testforpath", C, {{P::integer}, {P::pattern}}, "syscall path argument, normalized, matches"},
        {"testforfd", C, {{P::integer}, {P::pattern}}, "fd argument refers to an open file whose path matches"},
        {"testforuid", C, {{P::comparison}, {P::integer}}, "uid compares to value"},
        {"ctxfield_cmp", C, {{P::ctx_field}, {P::comparison}, {P::integer}}, "pid/uid/ssid compares to value"},
        {"file_keyword", C, {{P::string}, {P::string}}, "VFS file contains keyword"},
        {"store_cmp", C, {{P::string}, {P::comparison}, {P::integer}}, "scratch cell compares to value"},
        {"call_orig", A, {}, "run the original syscall with the current arguments"},
        {"log", A, {}, "emit one log record"},
        {"block", A, {{P::integer, true}}, "do not run the original syscall; return errno"},
        {"manipulateparam", A, {{P::integer}, {P::pattern}, {P::string}}, "rewrite a matching argument prefix"},
        {"store_set", A, {{P::string}, {P::literal}}, "write a scratch cell"},
        {"store_add", A, {{P::string}, {P::integer}}, "add to an integer scratch cell"},
        {"jump", A, {{P::integer}}, "continue traversal at a rule index"},
        {"hide_entry", A, {{P::string}}, "drop a name from a getdents listing"},
        {"emergency_exit", A, {}, "block and stop processing the event stream"},
    };
    return specs;
}

std::string_view type_name(ParamType t) {
    switch (t) {
    case P::integer: return "integer";
    case P::string: return "string";
    case P::pattern: return "wildcard pattern";
    case P::comparison: return "comparison operator";
    case P::ctx_field: return "context field";
    case P::literal: return "integer or string";
    }
    return "?";
}

const BuiltinSpec& checked_spec(std::string_view name, BuiltinKind kind, std::span<const Value> params) {
    const auto* spec = find_builtin(name);
    if (spec == nullptr) {
        throw BuiltinError(BuiltinError::Kind::unknown_builtin, "UnknownBuiltin: " + std::string(name));
    }
    if (spec->kind != kind) {
        throw BuiltinError(BuiltinError::Kind::wrong_kind,
                           std::string(name) + " is " + (spec->kind == C ? "a condition" : "an action") +
                               ", not " + (kind == C ? "a condition" : "an action"));
    }
    if (params.size() < spec->min_arity() || params.size() > spec->max_arity()) {
        const auto expected = spec->min_arity() == spec->max_arity()
                                  ? std::to_string(spec->max_arity())
                                  : std::to_string(spec->min_arity()) + ".." + std::to_string(spec->max_arity());
        throw BuiltinError(BuiltinError::Kind::arity, std::string(name) + " takes " + expected +
                                                          " argument(s), got " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto type = spec->params[i].type;
        const bool ok = type == P::integer  ? is_int(params[i])
                        : type == P::literal ? is_int(params[i]) || is_string(params[i])
                                             : is_string(params[i]);
        if (!ok) {
            throw BuiltinError(BuiltinError::Kind::type_mismatch, "argument " + std::to_string(i + 1) + " of " +
                                                                      std::string(name) + " must be a " +
                                                                      std::string(type_name(type)));
        }
    }
    return *spec;
}

std::int64_t int_param(std::span<const Value> params, std::size_t i) { return std::get<std::int64_t>(params[i]); }
const std::string& str_param(std::span<const Value> params, std::size_t i) { return std::get<std::string>(params[i]); }

std::size_t index_param(std::string_view name, std::span<const Value> params, std::size_t i) {
    const auto v = int_param(params, i);
    if (v < 0) {
        throw BuiltinError(BuiltinError::Kind::bad_param, std::string(name) + ": index must be >= 0");
    }
    return static_cast<std::size_t>(v);
}

WildcardPattern pattern_param(std::string_view name, std::span<const Value> params, std::size_t i) {
    auto p = WildcardPattern::parse(str_param(params, i));
    if (!p) {
        throw BuiltinError(BuiltinError::Kind::bad_param,
                           std::string(name) + ": '*' is only allowed once, at the end: \"" + str_param(params, i) +
                               "\"");
    }
    return *p;
}

CmpOp cmp_param(std::string_view name, std::span<const Value> params, std::size_t i) {
    auto op = parse_cmp(str_param(params, i));
    if (!op) {
        throw BuiltinError(BuiltinError::Kind::bad_param,
                           std::string(name) + ": unknown comparison \"" + str_param(params, i) + "\"");
    }
    return *op;
}

} // namespace

std::span<const BuiltinSpec> builtin_registry() { return registry(); }

const BuiltinSpec* find_builtin(std::string_view name) {
    for (const auto& spec : registry()) {
        if (spec.name == name) {
            return &spec;
        }
    }
    return nullptr;
}

ParamSource PreparedCondition::source() const {
    switch (op) {
    case CondOp::always_true: return ParamSource::none;
    case CondOp::parent_pname:
    case CondOp::self_pname:
    case CondOp::uid_cmp:
    case CondOp::ctx_cmp: return ParamSource::task_context;
    case CondOp::param:
    case CondOp::path_param:
    case CondOp::fd_path: return ParamSource::syscall_arg;
    case CondOp::file_keyword:
    case CondOp::store_cmp: return ParamSource::reactive;
    }
    return ParamSource::none;
}

PreparedCondition prepare_condition(std::string_view name, std::span<const Value> params) {
    checked_spec(name, C, params);
    PreparedCondition c;
    if (name == "always_true") {
        c.op = CondOp::always_true;
    } else if (name == "testforpname" || name == "testforselfpname") {
        c.op = name == "testforpname" ? CondOp::parent_pname : CondOp::self_pname;
        c.pattern = pattern_param(name, params, 0);
    } else if (name == "testforparam" || name == "testforpath" || name == "testforfd") {
        c.op = name == "testforparam" ? CondOp::param : name == "testforpath" ? CondOp::path_param : CondOp::fd_path;
        c.index = index_param(name, params, 0);
        c.pattern = pattern_param(name, params, 1);
    } else if (name == "testforuid") {
        c.op = CondOp::uid_cmp;
        c.cmp = cmp_param(name, params, 0);
        c.number = int_param(params, 1);
    } else if (name == "ctxfield_cmp") {
        c.op = CondOp::ctx_cmp;
        const auto field = parse_ctx_field(str_param(params, 0));
        if (!field) {
            throw BuiltinError(BuiltinError::Kind::bad_param,
                               "ctxfield_cmp: field must be pid, uid or ssid, got \"" + str_param(params, 0) + "\"");
        }
        c.field = *field;
        c.cmp = cmp_param(name, params, 1);
        c.number = int_param(params, 2);
    } else if (name == "file_keyword") {
        c.op = CondOp::file_keyword;
        const auto path = normalize_path(str_param(params, 0));
        if (!path) {
            throw BuiltinError(BuiltinError::Kind::bad_param, "file_keyword: path must be absolute");
        }
        c.text = *path;
        c.text2 = str_param(params, 1);
    } else if (name == "store_cmp") {
        c.op = CondOp::store_cmp;
        c.text = str_param(params, 0);
        c.cmp = cmp_param(name, params, 1);
        c.number = int_param(params, 2);
    }
    return c;
}

PreparedAction prepare_action(std::string_view name, std::span<const Value> params) {
    checked_spec(name, A, params);
    PreparedAction a;
    if (name == "call_orig") {
        a.op = ActOp::call_orig;
    } else if (name == "log") {
        a.op = ActOp::log;
    } else if (name == "block") {
        a.op = ActOp::block;
        if (!params.empty()) {
            const auto e = int_param(params, 0);
            a.number = e > 0 ? -e : e;
        }
    } else if (name == "manipulateparam") {
        a.op = ActOp::manipulate_param;
        a.index = index_param(name, params, 0);
        a.pattern = pattern_param(name, params, 1);
        a.text = str_param(params, 2);
    } else if (name == "store_set") {
        a.op = ActOp::store_set;
        a.text = str_param(params, 0);
        if (is_int(params[1])) {
            a.number = int_param(params, 1);
        } else {
            a.string_value = str_param(params, 1);
        }
    } else if (name == "store_add") {
        a.op = ActOp::store_add;
        a.text = str_param(params, 0);
        a.number = int_param(params, 1);
    } else if (name == "jump") {
        a.op = ActOp::jump;
        a.index = index_param(name, params, 0);
    } else if (name == "hide_entry") {
        a.op = ActOp::hide_entry;
        a.text = str_param(params, 0);
    } else if (name == "emergency_exit") {
        a.op = ActOp::emergency_exit;
    }
    return a;
}

std::optional<std::string> rewrite_prefix(std::string_view subject, const WildcardPattern& match,
                                          std::string_view replacement) {
    if (!match.matches(subject)) {
        return std::nullopt;
    }
    std::string_view rest = subject.substr(match.literal_prefix().size());
    std::string out(replacement);
    if (!out.empty() && out.back() == '/' && rest.starts_with('/')) {
        rest.remove_prefix(1);
    }
    out.append(rest);
    return out;
}

namespace {

Value* arg_at(EvalContext& ctx, std::size_t index, std::string_view who) {
    if (index < ctx.event.args.size()) {
        return &ctx.event.args[index];
    }
    ctx.diagnostics.push_back("ArgIndexOutOfRange: " + std::string(who) + " index " + std::to_string(index) +
                              " on " + std::string(syscall_name(ctx.event.syscall)) + " with " +
                              std::to_string(ctx.event.args.size()) + " argument(s)");
    return nullptr;
}

bool pattern_matches(const WildcardPattern& p, const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) {
        return p.matches(*s);
    }
    return p.matches(render(v));
}

std::int64_t ctx_field(const TaskContext& t, CtxField f) {
    switch (f) {
    case CtxField::pid: return t.pid;
    case CtxField::uid: return t.uid;
    case CtxField::ssid: return t.ssid;
    }
    return 0;
}

} // namespace

bool evaluate(const PreparedCondition& c, EvalContext& ctx) {
    switch (c.op) {
    case CondOp::always_true: return true;
    case CondOp::parent_pname: return c.pattern.matches(ctx.event.ctx.parent_pname);
    case CondOp::self_pname: return c.pattern.matches(ctx.event.ctx.pname);
    case CondOp::param: {
        const auto* v = arg_at(ctx, c.index, "testforparam");
        return v != nullptr && pattern_matches(c.pattern, *v);
    }
    case CondOp::path_param: {
        const auto* v = arg_at(ctx, c.index, "testforpath");
        if (v == nullptr) {
            return false;
        }
        if (const auto* s = std::get_if<std::string>(v)) {
            const auto norm = normalize_path(*s);
            return c.pattern.matches(norm ? *norm : *s);
        }
        return pattern_matches(c.pattern, *v);
    }
    case CondOp::fd_path: {
        const auto* v = arg_at(ctx, c.index, "testforfd");
        const auto* fd = v != nullptr ? std::get_if<std::int64_t>(v) : nullptr;
        const auto* file = fd != nullptr ? ctx.sandbox.fds.find(*fd) : nullptr;
        return file != nullptr && c.pattern.matches(file->path);
    }
    case CondOp::uid_cmp: return compare(ctx.event.ctx.uid, c.cmp, c.number);
    case CondOp::ctx_cmp: return compare(ctx_field(ctx.event.ctx, c.field), c.cmp, c.number);
    case CondOp::file_keyword: {
        const auto* content = ctx.sandbox.vfs.file_content(c.text);
        if (content == nullptr) {
            ctx.diagnostics.push_back("file_keyword: " + c.text + " is not a readable file");
            return false;
        }
        return content->find(c.text2) != std::string::npos;
    }
    case CondOp::store_cmp: {
        const auto cell = ctx.sandbox.store.get(c.text);
        const auto* n = std::get_if<std::int64_t>(&cell);
        return n != nullptr && compare(*n, c.cmp, c.number);
    }
    }
    return false;
}

int execute(const PreparedAction& a, EvalContext& ctx) {
    switch (a.op) {
    case ActOp::call_orig:
        ctx.result = exec_syscall(ctx.sandbox, ctx.event, &ctx.output);
        ctx.called_orig = true;
        return 0;
    case ActOp::log: {
        LogRecord record;
        record.seq = ctx.event.seq;
        record.pid = ctx.event.ctx.pid;
        record.uid = ctx.event.ctx.uid;
        record.syscall = std::string(syscall_name(ctx.event.syscall));
        record.args_json = args_to_json(ctx.event.args);
        record.result = ctx.result;
        try {
            ctx.sandbox.write_log(std::move(record));
        } catch (const std::exception& e) {
            ctx.diagnostics.push_back(std::string("log sink failure: ") + e.what());
        }
        ++ctx.log_records;
        return 0;
    }
    case ActOp::block:
        ctx.blocked = true;
        ctx.result = a.number ? *a.number : default_error(ctx.event.syscall, ctx.event.ctx);
        return 0;
    case ActOp::manipulate_param: {
        auto* v = arg_at(ctx, a.index, "manipulateparam");
        if (v == nullptr) {
            return 1;
        }
        if (auto* s = std::get_if<std::string>(v)) {
            if (auto rewritten = rewrite_prefix(*s, a.pattern, a.text)) {
                *s = std::move(*rewritten);
            }
        }
        return 0;
    }
    case ActOp::store_set:
        if (a.string_value) {
            ctx.sandbox.store.set(a.text, *a.string_value);
        } else {
            ctx.sandbox.store.set(a.text, a.number.value_or(0));
        }
        return 0;
    case ActOp::store_add:
        if (!ctx.sandbox.store.add(a.text, a.number.value_or(0))) {
            ctx.diagnostics.push_back("store_add: cell '" + a.text + "' holds a string");
            return 1;
        }
        return 0;
    case ActOp::jump:
        if (a.index >= ctx.chain_length) {
            ctx.diagnostics.push_back("JumpOutOfRange: target " + std::to_string(a.index) + " in a chain of " +
                                      std::to_string(ctx.chain_length) + " rule(s)");
            return 1;
        }
        ctx.jump_target = a.index;
        return 0;
    case ActOp::hide_entry:
        if (ctx.event.syscall == Syscall::getdents && ctx.result >= 0) {
            std::erase(ctx.output.entries, a.text);
            ctx.result = static_cast<std::int64_t>(ctx.output.entries.size());
        }
        return 0;
    case ActOp::emergency_exit:
        ctx.blocked = true;
        ctx.emergency = true;
        ctx.result = default_error(ctx.event.syscall, ctx.event.ctx);
        return 0;
    }
    return 1;
}

} // namespace apate
