#include "apate/program.hpp"

#include <charconv>
#include <sstream>

#include <json.hpp>

namespace apate {

namespace {

std::string_view kind_label(ProgramError::Kind kind) {
    switch (kind) {
    case ProgramError::Kind::bad_magic: return "BadMagic";
    case ProgramError::Kind::unsupported_version: return "UnsupportedVersion";
    case ProgramError::Kind::corrupt_record: return "CorruptRecord";
    case ProgramError::Kind::invalid_program: return "InvalidProgram";
    }
    return "ProgramError";
}

[[noreturn]] void invalid(const std::string& what) { throw ProgramError(ProgramError::Kind::invalid_program, 0, what); }

bool valid_name(std::string_view name) {
    if (name.empty()) {
        return false;
    }
    for (unsigned char c : name) {
        if (c < 0x20 || c == 0x7f || c == ',' || c == ':') {
            return false;
        }
    }
    return true;
}

} // namespace

ProgramError::ProgramError(Kind kind, std::size_t line, const std::string& what)
    : std::runtime_error(std::string(kind_label(kind)) + (line > 0 ? "(line " + std::to_string(line) + ")" : "") +
                         ": " + what),
      kind_(kind), line_(line) {}

RuleProgram RuleProgram::from_tables(ProgramTables tables) {
    std::vector<Condition> conditions;
    conditions.reserve(tables.conditions.size());
    for (std::size_t i = 0; i < tables.conditions.size(); ++i) {
        const auto& rec = tables.conditions[i];
        try {
            conditions.push_back(Condition::make(rec.builtin, rec.params));
        } catch (const BuiltinError& e) {
            invalid("condition " + std::to_string(i) + ": " + e.what());
        }
    }

    std::vector<ConditionBlock> blocks;
    blocks.reserve(tables.blocks.size());
    for (std::size_t i = 0; i < tables.blocks.size(); ++i) {
        const auto& rec = tables.blocks[i];
        auto operand = [&](const NodeRef& ref) -> Operand {
            if (ref.kind == NodeRef::Kind::condition) {
                if (ref.id >= conditions.size()) {
                    invalid("block " + std::to_string(i) + " references missing condition c" + std::to_string(ref.id));
                }
                return conditions[ref.id];
            }
            if (ref.id >= i) {
                invalid("block " + std::to_string(i) + " references b" + std::to_string(ref.id) +
                        ", which is not an earlier block");
            }
            return blocks[ref.id];
        };
        if (rec.op != BlockOp::and_op && rec.op != BlockOp::or_op) {
            invalid("block " + std::to_string(i) + " has an operator code other than 2 or 4");
        }
        blocks.emplace_back(operand(rec.left), operand(rec.right), rec.op);
    }

    std::vector<Action> actions;
    actions.reserve(tables.actions.size());
    for (std::size_t i = 0; i < tables.actions.size(); ++i) {
        const auto& rec = tables.actions[i];
        try {
            actions.push_back(Action::make(rec.builtin, rec.params));
        } catch (const BuiltinError& e) {
            invalid("action " + std::to_string(i) + ": " + e.what());
        }
    }

    std::vector<Rule> rules;
    rules.reserve(tables.rules.size());
    for (std::size_t i = 0; i < tables.rules.size(); ++i) {
        const auto& rec = tables.rules[i];
        if (!valid_name(rec.name)) {
            invalid("rule " + std::to_string(i) + " has an invalid name");
        }
        if (rec.guard >= blocks.size()) {
            invalid("rule " + rec.name + " references missing block b" + std::to_string(rec.guard));
        }
        if (rec.actions.empty()) {
            invalid("rule " + rec.name + " has an empty action chain");
        }
        ActionChain chain;
        bool blocked = false;
        for (auto id : rec.actions) {
            if (id >= actions.size()) {
                invalid("rule " + rec.name + " references missing action " + std::to_string(id));
            }
            const auto op = actions[id].prepared.op;
            if (op == ActOp::call_orig && blocked) {
                invalid("rule " + rec.name + " calls call_orig after block");
            }
            blocked = blocked || op == ActOp::block;
            chain.actions.push_back(actions[id]);
        }
        rules.push_back(Rule{rec.name, blocks[rec.guard], std::move(chain), false, SourceSpan{rec.line, rec.column}});
    }

    RuleProgram program;
    std::map<std::string, std::shared_ptr<const RuleChain>, std::less<>> chains;
    for (const auto& rec : tables.chains) {
        if (!valid_name(rec.name)) {
            invalid("chain with an invalid name");
        }
        if (chains.contains(rec.name)) {
            invalid("chain " + rec.name + " defined twice");
        }
        if (rec.entries.empty()) {
            invalid("chain " + rec.name + " has no rules");
        }
        auto chain = std::make_shared<RuleChain>();
        chain->name = rec.name;
        for (const auto& entry : rec.entries) {
            if (entry.rule >= rules.size()) {
                invalid("chain " + rec.name + " references missing rule " + std::to_string(entry.rule));
            }
            Rule rule = rules[entry.rule];
            rule.exit = entry.exit;
            chain->rules.push_back(std::move(rule));
        }
        chains.emplace(rec.name, std::move(chain));
    }

    for (std::size_t i = 0; i < tables.binds.size(); ++i) {
        const auto& rec = tables.binds[i];
        if (i > 0 && !(tables.binds[i - 1].syscall < rec.syscall)) {
            invalid("binds must be unique and ordered by syscall");
        }
        auto it = chains.find(rec.chain);
        if (it == chains.end()) {
            invalid("bind of " + std::string(hook_name(rec.syscall)) + " references missing chain " + rec.chain);
        }
        program.bound_[to_index(rec.syscall)] = it->second;
    }
    program.tables_ = std::move(tables);
    return program;
}

void ProgramBuilder::bind(Syscall sc, const RuleChain& chain) {
    if (binds_.contains(sc)) {
        throw std::invalid_argument(std::string(hook_name(sc)) + " is already bound");
    }
    std::string name = chain.name.empty() ? "#c" + std::to_string(tables_.chains.size()) : chain.name;
    if (!chain_ids_.contains(name)) {
        ChainRecord rec{name, {}};
        for (const auto& rule : chain.rules) {
            rec.entries.push_back(ChainEntry{add_rule(rule), rule.exit});
        }
        chain_ids_.emplace(name, static_cast<std::uint32_t>(tables_.chains.size()));
        tables_.chains.push_back(std::move(rec));
    }
    binds_.emplace(sc, std::move(name));
}

std::uint32_t ProgramBuilder::add_rule(const Rule& rule) {
    if (!rule.name.empty()) {
        if (auto it = rule_ids_.find(rule.name); it != rule_ids_.end()) {
            return it->second;
        }
    }
    const auto guard = add_guard(rule.guard);
    RuleRecord rec;
    rec.name = rule.name.empty() ? "#" + std::to_string(tables_.rules.size()) : rule.name;
    rec.guard = guard.id;
    for (const auto& action : rule.actions.actions) {
        rec.actions.push_back(static_cast<std::uint32_t>(tables_.actions.size()));
        tables_.actions.push_back(ActionRecord{action.builtin, action.params});
    }
    rec.line = rule.span.line;
    rec.column = rule.span.column;
    const auto id = static_cast<std::uint32_t>(tables_.rules.size());
    if (!rule.name.empty()) {
        rule_ids_.emplace(rule.name, id);
    }
    tables_.rules.push_back(std::move(rec));
    return id;
}

NodeRef ProgramBuilder::add_guard(const ConditionBlock& guard) {
    std::vector<NodeRef> stack;
    const auto leaves = guard.leaves();
    for (const auto& step : guard.steps()) {
        if (step.kind == ConditionBlock::Step::Kind::leaf) {
            const auto& c = leaves[step.leaf];
            stack.push_back(NodeRef{NodeRef::Kind::condition, static_cast<std::uint32_t>(tables_.conditions.size())});
            tables_.conditions.push_back(CondRecord{c.builtin, c.params});
            continue;
        }
        const auto right = stack.back();
        stack.pop_back();
        const auto left = stack.back();
        stack.pop_back();
        stack.push_back(NodeRef{NodeRef::Kind::block, static_cast<std::uint32_t>(tables_.blocks.size())});
        tables_.blocks.push_back(BlockRecord{left, right, step.op});
    }
    return stack.back();
}

ProgramTables ProgramBuilder::tables() const {
    ProgramTables out = tables_;
    for (const auto& [sc, name] : binds_) {
        out.binds.push_back(BindRecord{sc, name});
    }
    return out;
}

RuleProgram ProgramBuilder::build() const { return RuleProgram::from_tables(tables()); }

namespace {

std::string ref_text(const NodeRef& ref) {
    return (ref.kind == NodeRef::Kind::condition ? "c" : "b") + std::to_string(ref.id);
}

template <typename T>
std::string join_ids(const std::vector<T>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(ids[i]);
    }
    return out;
}

} // namespace

std::string serialize(const RuleProgram& program) {
    const auto& t = program.tables();
    std::ostringstream out;
    out << kProgramMagic << ' ' << kProgramVersion << '\n';
    for (std::size_t i = 0; i < t.conditions.size(); ++i) {
        out << "COND\t" << i << '\t' << t.conditions[i].builtin << '\t' << literals_to_json(t.conditions[i].params)
            << '\n';
    }
    for (std::size_t i = 0; i < t.blocks.size(); ++i) {
        const auto& b = t.blocks[i];
        out << "BLOCK\t" << i << '\t' << ref_text(b.left) << '\t' << ref_text(b.right) << '\t' << op_code(b.op)
            << '\n';
    }
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
        out << "ACTION\t" << i << '\t' << t.actions[i].builtin << '\t' << literals_to_json(t.actions[i].params)
            << '\n';
    }
    for (std::size_t i = 0; i < t.rules.size(); ++i) {
        const auto& r = t.rules[i];
        out << "RULE\t" << i << '\t' << r.name << "\tb" << r.guard << '\t' << join_ids(r.actions) << '\t' << r.line
            << ':' << r.column << '\n';
    }
    for (std::size_t i = 0; i < t.chains.size(); ++i) {
        const auto& c = t.chains[i];
        out << "CHAIN\t" << i << '\t' << c.name << '\t';
        for (std::size_t k = 0; k < c.entries.size(); ++k) {
            out << (k > 0 ? "," : "") << (c.entries[k].exit ? ":" : "") << c.entries[k].rule;
        }
        out << '\n';
    }
    for (const auto& b : t.binds) {
        out << "BIND\t" << hook_name(b.syscall) << '\t' << b.chain << '\n';
    }
    return out.str();
}

namespace {

class RecordReader {
public:
    explicit RecordReader(std::size_t line) : line_(line) {}

    [[noreturn]] void corrupt(const std::string& what) const {
        throw ProgramError(ProgramError::Kind::corrupt_record, line_, what);
    }

    std::uint32_t u32(std::string_view text) const {
        std::uint32_t v = 0;
        const auto* end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(text.data(), end, v);
        if (text.empty() || ec != std::errc{} || ptr != end || (text.size() > 1 && text[0] == '0')) {
            corrupt("expected a non-negative integer, got '" + std::string(text) + "'");
        }
        return v;
    }

    NodeRef ref(std::string_view text) const {
        if (text.size() < 2 || (text[0] != 'c' && text[0] != 'b')) {
            corrupt("expected c<id> or b<id>, got '" + std::string(text) + "'");
        }
        return NodeRef{text[0] == 'c' ? NodeRef::Kind::condition : NodeRef::Kind::block, u32(text.substr(1))};
    }

    std::vector<Value> literals(std::string_view text) const {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            corrupt(std::string("bad literal list: ") + e.what());
        }
        if (!j.is_array()) {
            corrupt("literal list must be a JSON array");
        }
        std::vector<Value> out;
        for (const auto& item : j) {
            if (item.is_number_integer()) {
                out.emplace_back(item.get<std::int64_t>());
            } else if (item.is_string()) {
                out.emplace_back(item.get<std::string>());
            } else {
                corrupt("literals must be integers or strings");
            }
        }
        if (literals_to_json(out) != text) {
            corrupt("literal list is not in canonical form");
        }
        return out;
    }

    std::vector<std::uint32_t> id_list(std::string_view text) const {
        std::vector<std::uint32_t> out;
        std::size_t pos = 0;
        while (true) {
            const auto comma = text.find(',', pos);
            out.push_back(u32(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
            if (comma == std::string_view::npos) {
                break;
            }
            pos = comma + 1;
        }
        return out;
    }

    std::string name(std::string_view text) const {
        if (!valid_name(text)) {
            corrupt("invalid name '" + std::string(text) + "'");
        }
        return std::string(text);
    }

private:
    std::size_t line_;
};

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto tab = line.find('\t', pos);
        fields.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
        if (tab == std::string_view::npos) {
            return fields;
        }
        pos = tab + 1;
    }
}

} // namespace

RuleProgram deserialize(std::string_view text) {
    const auto first_eol = text.find('\n');
    const auto header = text.substr(0, first_eol);
    const std::string magic = std::string(kProgramMagic) + " ";
    if (!header.starts_with(magic)) {
        throw ProgramError(ProgramError::Kind::bad_magic, 1, "file does not start with '" + magic + "'");
    }
    {
        const auto version = header.substr(magic.size());
        int v = 0;
        auto [ptr, ec] = std::from_chars(version.data(), version.data() + version.size(), v);
        if (ec != std::errc{} || ptr != version.data() + version.size()) {
            throw ProgramError(ProgramError::Kind::bad_magic, 1, "unreadable version '" + std::string(version) + "'");
        }
        if (v != kProgramVersion) {
            throw ProgramError(ProgramError::Kind::unsupported_version, 1,
                               "version " + std::to_string(v) + " (supported: " + std::to_string(kProgramVersion) +
                                   ")");
        }
    }
    if (first_eol == std::string_view::npos) {
        throw ProgramError(ProgramError::Kind::corrupt_record, 1, "missing newline after header");
    }

    enum Section { cond, block, action, rule, chain, bind };
    ProgramTables t;
    int section = cond;
    std::size_t line_no = 1;
    std::size_t pos = first_eol + 1;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        ++line_no;
        RecordReader rd(line_no);
        if (eol == std::string_view::npos) {
            rd.corrupt("last record is not newline-terminated");
        }
        const auto fields = split_tabs(text.substr(pos, eol - pos));
        pos = eol + 1;
        const auto tag = fields[0];
        auto expect = [&](std::size_t n, int sec) {
            if (fields.size() != n) {
                rd.corrupt(std::string(tag) + " record needs " + std::to_string(n) + " fields, has " +
                           std::to_string(fields.size()));
            }
            if (sec < section) {
                rd.corrupt(std::string(tag) + " record out of section order");
            }
            section = sec;
        };
        auto expect_id = [&](std::string_view field, std::size_t next) {
            if (rd.u32(field) != next) {
                rd.corrupt("ids must be consecutive from 0");
            }
        };
        if (tag == "COND" || tag == "ACTION") {
            const bool is_cond = tag == "COND";
            expect(4, is_cond ? cond : action);
            expect_id(fields[1], is_cond ? t.conditions.size() : t.actions.size());
            auto params = rd.literals(fields[3]);
            if (is_cond) {
                t.conditions.push_back(CondRecord{std::string(fields[2]), std::move(params)});
            } else {
                t.actions.push_back(ActionRecord{std::string(fields[2]), std::move(params)});
            }
        } else if (tag == "BLOCK") {
            expect(5, block);
            expect_id(fields[1], t.blocks.size());
            const auto op = rd.u32(fields[4]);
            if (op != 2 && op != 4) {
                rd.corrupt("block operator must be 2 or 4");
            }
            t.blocks.push_back(BlockRecord{rd.ref(fields[2]), rd.ref(fields[3]), static_cast<BlockOp>(op)});
        } else if (tag == "RULE") {
            expect(6, rule);
            expect_id(fields[1], t.rules.size());
            RuleRecord r;
            r.name = rd.name(fields[2]);
            const auto guard = rd.ref(fields[3]);
            if (guard.kind != NodeRef::Kind::block) {
                rd.corrupt("rule guard must be a block");
            }
            r.guard = guard.id;
            r.actions = rd.id_list(fields[4]);
            const auto colon = fields[5].find(':');
            if (colon == std::string_view::npos) {
                rd.corrupt("span must be line:column");
            }
            r.line = rd.u32(fields[5].substr(0, colon));
            r.column = rd.u32(fields[5].substr(colon + 1));
            t.rules.push_back(std::move(r));
        } else if (tag == "CHAIN") {
            expect(4, chain);
            expect_id(fields[1], t.chains.size());
            ChainRecord c;
            c.name = rd.name(fields[2]);
            std::size_t p = 0;
            const auto list = fields[3];
            while (true) {
                const auto comma = list.find(',', p);
                auto item = list.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p);
                const bool exit = item.starts_with(':');
                if (exit) {
                    item.remove_prefix(1);
                }
                c.entries.push_back(ChainEntry{rd.u32(item), exit});
                if (comma == std::string_view::npos) {
                    break;
                }
                p = comma + 1;
            }
            t.chains.push_back(std::move(c));
        } else if (tag == "BIND") {
            expect(3, bind);
            const auto sc = syscall_from_name(fields[1]);
            if (!sc || fields[1] != hook_name(*sc)) {
                rd.corrupt("unknown hook '" + std::string(fields[1]) + "'");
            }
            t.binds.push_back(BindRecord{*sc, rd.name(fields[2])});
        } else {
            rd.corrupt("unknown record type '" + std::string(tag) + "'");
        }
    }
    return RuleProgram::from_tables(std::move(t));
}

} // namespace apate
