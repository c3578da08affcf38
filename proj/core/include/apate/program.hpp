#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apate/engine.hpp"
#include "apate/syscall.hpp"

namespace apate {

inline constexpr std::string_view kProgramMagic = "APATE-RP";
inline constexpr int kProgramVersion = 1;

/// Reference to a condition (c<id>) or a condition block (b<id>).
struct NodeRef {
    enum class Kind : std::uint8_t { condition, block } kind = Kind::condition;
    std::uint32_t id = 0;

    friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

struct CondRecord {
    std::string builtin;
    std::vector<Value> params;
    friend bool operator==(const CondRecord&, const CondRecord&) = default;
};

struct BlockRecord {
    NodeRef left;
    NodeRef right;
    BlockOp op = BlockOp::and_op;
    friend bool operator==(const BlockRecord&, const BlockRecord&) = default;
};

struct ActionRecord {
    std::string builtin;
    std::vector<Value> params;
    friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

struct RuleRecord {
    std::string name;
    std::uint32_t guard = 0; // block id
    std::vector<std::uint32_t> actions;
    std::uint32_t line = 0;
    std::uint32_t column = 0;
    friend bool operator==(const RuleRecord&, const RuleRecord&) = default;
};

struct ChainEntry {
    std::uint32_t rule = 0;
    bool exit = false;
    friend bool operator==(const ChainEntry&, const ChainEntry&) = default;
};

struct ChainRecord {
    std::string name;
    std::vector<ChainEntry> entries;
    friend bool operator==(const ChainRecord&, const ChainRecord&) = default;
};

struct BindRecord {
    Syscall syscall = Syscall::open;
    std::string chain;
    friend bool operator==(const BindRecord&, const BindRecord&) = default;
};

/// The serialized form of a program: flat tables in emission order.
struct ProgramTables {
    std::vector<CondRecord> conditions;
    std::vector<BlockRecord> blocks;
    std::vector<ActionRecord> actions;
    std::vector<RuleRecord> rules;
    std::vector<ChainRecord> chains;
    std::vector<BindRecord> binds; // sorted by syscall

    friend bool operator==(const ProgramTables&, const ProgramTables&) = default;
};

class ProgramError : public std::runtime_error {
public:
    enum class Kind { bad_magic, unsupported_version, corrupt_record, invalid_program };

    ProgramError(Kind kind, std::size_t line, const std::string& what);
    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

/// An immutable, validated binding of rule chains to syscalls. Safe to share
/// across threads once constructed.
class RuleProgram {
public:
    /// The empty program: every syscall passes through.
    RuleProgram() = default;

    /// Validates references, builtins and binds. Throws ProgramError.
    static RuleProgram from_tables(ProgramTables tables);

    const ProgramTables& tables() const { return tables_; }
    const RuleChain* chain_for(Syscall sc) const { return bound_[to_index(sc)].get(); }
    bool empty() const { return tables_.binds.empty(); }

    friend bool operator==(const RuleProgram& a, const RuleProgram& b) { return a.tables_ == b.tables_; }

private:
    ProgramTables tables_;
    std::array<std::shared_ptr<const RuleChain>, kSyscallCount> bound_{};
};

/// Builds canonical tables from in-memory rule chains. Named rules are
/// emitted once; unnamed rules every time they appear.
class ProgramBuilder {
public:
    /// Emits the chain (if not yet emitted under this name) and binds it.
    void bind(Syscall sc, const RuleChain& chain);
    RuleProgram build() const;
    ProgramTables tables() const;

private:
    std::uint32_t add_rule(const Rule& rule);
    NodeRef add_guard(const ConditionBlock& guard);

    ProgramTables tables_;
    std::map<std::string, std::uint32_t, std::less<>> rule_ids_;
    std::map<std::string, std::uint32_t, std::less<>> chain_ids_;
    std::map<Syscall, std::string> binds_;
};

/// Canonical text: `APATE-RP 1`, then COND/BLOCK/ACTION/RULE/CHAIN/BIND
/// records, one per line, tab-separated.
std::string serialize(const RuleProgram& program);

/// Throws ProgramError (BadMagic, UnsupportedVersion, CorruptRecord).
/// Accepts only canonical text, so serialize(deserialize(x)) == x.
RuleProgram deserialize(std::string_view text);

} // namespace apate
