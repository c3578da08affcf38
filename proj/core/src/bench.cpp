#include "apate/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <random>
#include <tuple>

#include "apate/engine.hpp"

namespace apate::bench {

namespace {

constexpr const char* kSource = "/bench/src.bin";
constexpr const char* kTarget = "/bench/dst.bin";

const TaskContext& copy_context() {
    static const TaskContext ctx{4242, 1000, 4242, "cp", "bash"};
    return ctx;
}

Condition uid_test(const char* cmp) { return Condition::make("testforuid", {std::string(cmp), std::int64_t{0}}); }

ActionChain chain_of(bool with_log) {
    ActionChain chain{{Action::make("call_orig")}};
    if (with_log) {
        chain.actions.push_back(Action::make("log"));
    }
    return chain;
}

RuleProgram bind_everywhere(const RuleChain& chain) {
    ProgramBuilder builder;
    for (auto sc : kAllSyscalls) {
        builder.bind(sc, chain);
    }
    return builder.build();
}

RuleChain conditions_chain(bool with_log) {
    RuleChain chain{with_log ? "m4" : "m3", {}};
    for (std::size_t r = 1; r <= kRulesPerSetting; ++r) {
        const bool last_rule = r == kRulesPerSetting;
        // Left-deep AND of kConditionsPerRule leaves; only the last leaf varies.
        auto leaf = [&](std::size_t c) { return uid_test(c == kConditionsPerRule && !last_rule ? "<" : ">="); };
        ConditionBlock guard(leaf(1), leaf(2), BlockOp::and_op);
        for (std::size_t c = 3; c <= kConditionsPerRule; ++c) {
            guard = ConditionBlock(std::move(guard), leaf(c), BlockOp::and_op);
        }
        chain.rules.push_back(Rule{"r" + std::to_string(r), std::move(guard), chain_of(with_log), false, {}});
    }
    return chain;
}

std::int64_t as_int(const Disposition& d, const char* what) {
    if (d.result < 0) {
        throw std::runtime_error(std::string("bench copy: ") + what + " failed with " + std::to_string(d.result));
    }
    return d.result;
}

} // namespace

std::string_view setting_name(SettingId id) {
    switch (id) {
    case SettingId::m1: return "m1";
    case SettingId::m2: return "m2";
    case SettingId::m3: return "m3";
    case SettingId::m4: return "m4";
    }
    return "?";
}

std::optional<SettingId> parse_setting(std::string_view name) {
    for (auto id : {SettingId::m1, SettingId::m2, SettingId::m3, SettingId::m4}) {
        if (setting_name(id) == name) {
            return id;
        }
    }
    return std::nullopt;
}

BenchSetting make_setting(SettingId id) {
    BenchSetting s;
    s.id = id;
    switch (id) {
    case SettingId::m1:
        break;
    case SettingId::m2:
        s.intercept = true;
        s.program = bind_everywhere(
            RuleChain{"m2", {Rule{"all", ConditionBlock::neutral(Condition::always_true()), chain_of(true), false, {}}}});
        break;
    case SettingId::m3:
    case SettingId::m4:
        s.intercept = true;
        s.program = bind_everywhere(conditions_chain(id == SettingId::m4));
        break;
    }
    return s;
}

std::vector<std::uint64_t> gen_sizes(std::uint64_t max, Recurrence recurrence) {
    if (max == 0 || max > 1'000'000'000ULL) {
        throw std::invalid_argument("gen_sizes: max must be in (0, 10^9]");
    }
    std::vector<std::uint64_t> out{1};
    while (true) {
        const auto last = out.back();
        std::uint64_t next = 0;
        if (last < 1'000'000ULL) {
            next = last + 1;
        } else if (last < 100'000'000ULL) {
            next = last + 1'000;
        } else if (recurrence == Recurrence::previous || out.size() < 2) {
            next = last + 1'000'000;
        } else {
            next = out[out.size() - 2] + 1'000'000;
        }
        if (next > max) {
            return out;
        }
        out.push_back(next);
    }
}

std::vector<std::uint64_t> subsample_geometric(std::span<const std::uint64_t> sizes, std::size_t count) {
    if (count >= sizes.size()) {
        return {sizes.begin(), sizes.end()};
    }
    if (count == 0) {
        return {};
    }
    if (count == 1) {
        return {sizes.back()};
    }
    const double lo = static_cast<double>(sizes.front());
    const double ratio = static_cast<double>(sizes.back()) / lo;
    std::vector<std::uint64_t> out;
    std::size_t next_free = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const auto target = lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(count - 1));
        auto idx = static_cast<std::size_t>(
            std::lower_bound(sizes.begin(), sizes.end(), static_cast<std::uint64_t>(std::llround(target))) -
            sizes.begin());
        // Keep room for the remaining picks so the result has exactly `count` distinct sizes.
        idx = std::clamp(idx, next_free, sizes.size() - (count - k));
        out.push_back(sizes[idx]);
        next_free = idx + 1;
    }
    return out;
}

CopyResult run_copy(std::uint64_t size, const BenchSetting& setting, SandboxState& sandbox, std::uint64_t buffer,
                    std::uint64_t seed) {
    if (size == 0 || buffer == 0) {
        throw std::invalid_argument("run_copy: size and buffer must be positive");
    }
    std::string content(size, '\0');
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < content.size(); i += 8) {
        const auto word = rng();
        std::memcpy(content.data() + i, &word, std::min<std::size_t>(8, content.size() - i));
    }
    sandbox.vfs.ensure_directories("/bench");
    sandbox.vfs.put_file(kSource, std::move(content));
    sandbox.vfs.remove_file(kTarget);

    CopyResult result;
    std::uint64_t seq = 0;
    auto call = [&](Syscall sc, std::vector<Value> args) {
        auto ev = make_event(sc, std::move(args), copy_context(), ++seq);
        auto d = setting.intercept ? dispatch(setting.program, std::move(ev), sandbox) : pass_through(std::move(ev), sandbox);
        ++result.syscalls;
        result.conditions += d.conditions_evaluated;
        result.log_records += d.log_records;
        return d;
    };
    const auto chunk = static_cast<std::int64_t>(buffer);

    const auto start = std::chrono::steady_clock::now();
    const auto src = as_int(call(Syscall::open, {std::string(kSource), open_flags::rdonly}), "open source");
    const auto dst = as_int(
        call(Syscall::open, {std::string(kTarget), open_flags::wronly | open_flags::creat | open_flags::trunc}),
        "open target");
    while (true) {
        auto d = call(Syscall::read, {src, chunk});
        if (as_int(d, "read") == 0) {
            break;
        }
        as_int(call(Syscall::write, {dst, Blob{std::move(d.output.data)}}), "write");
    }
    as_int(call(Syscall::close, {src}), "close source");
    as_int(call(Syscall::close, {dst}), "close target");
    as_int(call(Syscall::unlink, {std::string(kTarget)}), "unlink target");
    if (result.log_records > 0) {
        // A copy is finished once its records are delivered.
        sandbox.logs.flush();
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    const double h = static_cast<double>(sorted.size() - 1) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted[lo];
    }
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

SampleStats stats(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw TooFewSamples();
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double mean = 0.0;
    for (double x : sorted) {
        mean += x;
    }
    mean /= n;
    double ss = 0.0;
    for (double x : sorted) {
        ss += (x - mean) * (x - mean);
    }
    SampleStats s;
    s.n = sorted.size();
    s.sd = std::sqrt(ss / (n - 1.0));
    s.var = s.sd * s.sd;
    s.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    return s;
}

std::vector<SuiteRow> run_suite(std::span<const SettingId> settings, std::span<const std::uint64_t> sizes,
                                const SuiteOptions& options) {
    struct Slot {
        BenchSetting setting;
        SandboxState sandbox;
    };
    std::vector<std::unique_ptr<Slot>> slots;
    for (auto id : settings) {
        auto slot = std::make_unique<Slot>();
        slot->setting = make_setting(id);
        if (options.make_sink && (id == SettingId::m2 || id == SettingId::m4)) {
            slot->sandbox.logs.add_sink(options.make_sink());
        }
        slots.push_back(std::move(slot));
    }
    std::vector<SuiteRow> rows;
    rows.reserve(settings.size() * sizes.size() * options.reps);
    for (auto size : sizes) {
        for (std::size_t rep = 0; rep < options.reps; ++rep) {
            for (auto& slot : slots) {
                const auto copy = run_copy(size, slot->setting, slot->sandbox, options.buffer, size * 1000003ULL + rep);
                rows.push_back(SuiteRow{slot->setting.id, size, rep, copy});
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SuiteRow& a, const SuiteRow& b) {
        return std::tie(a.setting, a.size, a.rep) < std::tie(b.setting, b.size, b.rep);
    });
    return rows;
}

std::vector<SummaryRow> summarize(std::span<const SuiteRow> rows) {
    std::map<std::pair<SettingId, std::uint64_t>, std::vector<double>> groups;
    for (const auto& row : rows) {
        groups[{row.setting, row.size}].push_back(row.copy.seconds);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, samples] : groups) {
        SummaryRow row{key.first, key.second, {}};
        if (samples.size() >= 2) {
            row.stats = stats(samples);
        } else {
            row.stats.n = samples.size();
            row.stats.median = samples.front();
        }
        out.push_back(row);
    }
    return out;
}

void write_rows_csv(std::ostream& out, std::span<const SuiteRow> rows) {
    out << "setting,size,rep,runtime_sec,syscalls,conditions\n";
    out.precision(9);
    for (const auto& r : rows) {
        out << setting_name(r.setting) << ',' << r.size << ',' << r.rep << ',' << std::fixed << r.copy.seconds
            << std::defaultfloat << ',' << r.copy.syscalls << ',' << r.copy.conditions << '\n';
    }
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
    out << "setting,size,n,median,sd,var,iqr\n";
    out.precision(9);
    for (const auto& r : rows) {
        out << setting_name(r.setting) << ',' << r.size << ',' << r.stats.n << ',' << r.stats.median << ','
            << r.stats.sd << ',' << r.stats.var << ',' << r.stats.iqr << '\n';
    }
}

} // namespace apate::bench
