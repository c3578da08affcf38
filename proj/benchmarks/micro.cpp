#include <benchmark/benchmark.h>

#include "apate/bench.hpp"
#include "apate/engine.hpp"
#include "apate/log.hpp"
#include "apate/program.hpp"

using namespace apate;

namespace {

void BM_Dispatch(benchmark::State& state) {
    const auto setting = bench::make_setting(static_cast<bench::SettingId>(state.range(0)));
    SandboxState sb;
    sb.vfs.put_file("/etc/passwd", "root:x:0:0");
    const auto ev = make_event(Syscall::getuid, {});
    std::uint64_t conditions = 0;
    for (auto _ : state) {
        auto d = setting.intercept ? dispatch(setting.program, ev, sb) : pass_through(ev, sb);
        conditions += d.conditions_evaluated;
        benchmark::DoNotOptimize(d.result);
    }
    state.SetLabel(std::string(bench::setting_name(setting.id)));
    state.counters["conditions"] =
        benchmark::Counter(static_cast<double>(conditions), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Dispatch)->DenseRange(0, 3);

// One left-deep AND chain of n uid comparisons.
void BM_ConditionBlock(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto leaf = [] { return Condition::make("testforuid", {std::string(">="), std::int64_t{0}}); };
    ConditionBlock block(leaf(), leaf(), BlockOp::and_op);
    for (std::size_t i = 2; i < n; ++i) {
        block = ConditionBlock(std::move(block), leaf(), BlockOp::and_op);
    }
    SandboxState sb;
    const auto ev = make_event(Syscall::getpid, {});
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_condition_block(block, ev, sb));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ConditionBlock)->Arg(2)->Arg(50)->Arg(500);

void BM_PatternBlock(benchmark::State& state) {
    ConditionBlock block(Condition::make("testforpname", {std::string("mysql")}),
                         Condition::make("testforparam", {std::int64_t{0}, std::string("/var/lib/mysql/*")}),
                         BlockOp::and_op);
    TaskContext ctx;
    ctx.parent_pname = "mysql";
    SandboxState sb;
    const auto ev = make_event(Syscall::open, {std::string("/var/lib/mysql/ibdata1")}, ctx);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_condition_block(block, ev, sb));
    }
}
BENCHMARK(BM_PatternBlock);

void BM_FormatLogLine(benchmark::State& state) {
    LogRecord r;
    r.timestamp = "2024-01-01T00:00:00.000000Z";
    r.seq = 42;
    r.pid = 300;
    r.uid = 1000;
    r.syscall = "open";
    r.args_json = "[\"/var/lib/mysql/ibdata1\",66]";
    r.result = 3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(format_log_line(r));
    }
}
BENCHMARK(BM_FormatLogLine);

void BM_CopyWorkload(benchmark::State& state) {
    const auto setting = bench::make_setting(static_cast<bench::SettingId>(state.range(0)));
    SandboxState sb;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bench::run_copy(100'000, setting, sb).syscalls);
    }
    state.SetLabel(std::string(bench::setting_name(setting.id)));
}
BENCHMARK(BM_CopyWorkload)->DenseRange(0, 3);

} // namespace

BENCHMARK_MAIN();
