// apate: compile rule sources, replay traces through the sandbox, run the copy benchmark.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "apate/bench.hpp"
#include "apate/cloak.hpp"
#include "apate/dsl/compiler.hpp"
#include "apate/program.hpp"
#include "apate/trace.hpp"
#include "apate/vfs.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kIoError = 2;

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return false;
    }
    out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return !in.bad();
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    return static_cast<bool>(out.flush());
}

int cmd_compile(const std::string& src, const std::string& out) {
    std::string text;
    if (!read_file(src, text)) {
        std::cerr << "apate: cannot read " << src << "\n";
        return kIoError;
    }
    try {
        const auto result = apate::dsl::compile_source({text, src});
        for (const auto& w : result.warnings) {
            std::cerr << src << ':' << w.span.line << ':' << w.span.column << ": warning: " << w.message << "\n";
        }
        if (!write_file(out, apate::serialize(result.program))) {
            std::cerr << "apate: cannot write " << out << "\n";
            return kIoError;
        }
    } catch (const apate::dsl::DslError& e) {
        std::cerr << src << ':' << e.what() << "\n";
        return kFailed;
    } catch (const apate::ProgramError& e) {
        std::cerr << src << ": " << e.what() << "\n";
        return kFailed;
    }
    return kOk;
}

struct RunArgs {
    std::string program;
    std::string trace;
    std::string fs;
    std::string log_file;
    std::string log_udp;
    std::string cloak;
    std::string report;
};

int cmd_run(RunArgs args) {
    std::string program_text;
    if (!read_file(args.program, program_text)) {
        std::cerr << "apate: cannot read " << args.program << "\n";
        return kFailed;
    }
    std::string trace_text;
    if (args.trace == "-") {
        trace_text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    } else if (!read_file(args.trace, trace_text)) {
        std::cerr << "apate: cannot read " << args.trace << "\n";
        return kFailed;
    }
    try {
        auto program = apate::deserialize(program_text);
        const auto trace = apate::parse_trace(trace_text);

        apate::SandboxState sandbox;
        if (!args.fs.empty()) {
            std::string manifest;
            if (!read_file(args.fs, manifest)) {
                std::cerr << "apate: cannot read " << args.fs << "\n";
                return kFailed;
            }
            sandbox.vfs = apate::vfs_from_manifest(manifest);
        }
        if (!args.cloak.empty()) {
            program = apate::apply_cloak(program, apate::CloakOptions{args.cloak});
            const auto path = *apate::normalize_path(args.cloak);
            if (!sandbox.vfs.ensure_directories(apate::parent_path(path))) {
                std::cerr << "apate: cannot place the cloaked log at " << path << "\n";
                return kFailed;
            }
            sandbox.vfs_log_path = path;
        }
        if (args.log_udp.empty()) {
            if (const char* env = std::getenv("APATE_LOG_UDP"); env != nullptr) {
                args.log_udp = env;
            }
        }
        if (!args.log_file.empty()) {
            sandbox.logs.add_sink(apate::make_file_sink(args.log_file));
        }
        if (!args.log_udp.empty()) {
            sandbox.logs.add_sink(apate::make_udp_sink(args.log_udp));
        }

        const auto report = apate::replay_trace(program, trace, sandbox);
        const auto json = apate::report_to_json(report);
        if (args.report.empty()) {
            std::cout << json;
        } else if (!write_file(args.report, json)) {
            std::cerr << "apate: cannot write " << args.report << "\n";
            return kFailed;
        }
    } catch (const apate::ProgramError& e) {
        std::cerr << args.program << ": " << e.what() << "\n";
        return kFailed;
    } catch (const apate::TraceError& e) {
        std::cerr << args.trace << ": " << e.what() << "\n";
        return kFailed;
    } catch (const apate::ManifestError& e) {
        std::cerr << args.fs << ": " << e.what() << "\n";
        return kFailed;
    } catch (const std::exception& e) {
        std::cerr << "apate: " << e.what() << "\n";
        return kFailed;
    }
    return kOk;
}

struct BenchArgs {
    std::string setting = "all";
    std::uint64_t max_size = 2'000'000;
    std::size_t reps = 30;
    std::uint64_t buffer = apate::bench::kDefaultBuffer;
    std::size_t sizes = 40;
    std::string recurrence = "previous";
    std::string out;
    std::string summary;
    std::string log_file;
    std::string log_udp;
};

int cmd_bench(BenchArgs args) {
    namespace b = apate::bench;
    std::vector<b::SettingId> settings;
    if (args.setting == "all") {
        settings = {b::SettingId::m1, b::SettingId::m2, b::SettingId::m3, b::SettingId::m4};
    } else if (auto id = b::parse_setting(args.setting)) {
        settings = {*id};
    } else {
        std::cerr << "apate: unknown setting " << args.setting << "\n";
        return kFailed;
    }
    try {
        const auto rec = args.recurrence == "second-previous" ? b::Recurrence::second_previous : b::Recurrence::previous;
        const auto schedule = b::gen_sizes(args.max_size, rec);
        const auto sizes = b::subsample_geometric(schedule, args.sizes);

        b::SuiteOptions options;
        options.reps = args.reps;
        options.buffer = args.buffer;
        if (args.log_udp.empty()) {
            if (const char* env = std::getenv("APATE_LOG_UDP"); env != nullptr) {
                args.log_udp = env;
            }
        }
        if (!args.log_udp.empty()) {
            options.make_sink = [addr = args.log_udp] { return apate::make_udp_sink(addr); };
        } else if (!args.log_file.empty()) {
            options.make_sink = [path = args.log_file] { return apate::make_file_sink(path); };
        }
        const auto rows = b::run_suite(settings, sizes, options);

        std::ostringstream csv;
        b::write_rows_csv(csv, rows);
        if (args.out.empty()) {
            std::cout << csv.str();
        } else if (!write_file(args.out, csv.str())) {
            std::cerr << "apate: cannot write " << args.out << "\n";
            return kIoError;
        }
        if (!args.summary.empty()) {
            std::ostringstream sum;
            b::write_summary_csv(sum, b::summarize(rows));
            if (!write_file(args.summary, sum.str())) {
                std::cerr << "apate: cannot write " << args.summary << "\n";
                return kIoError;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "apate: " << e.what() << "\n";
        return kFailed;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"apate: syscall rule compiler, replayer and benchmark"};
    app.require_subcommand(1);

    std::string src;
    std::string out;
    auto* compile = app.add_subcommand("compile", "compile an .apate source into an .apc program");
    compile->add_option("source", src, "source file")->required();
    compile->add_option("-o,--output", out, "program file to write")->required();

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "replay a trace through a compiled program");
    run->add_option("--program", run_args.program, "compiled .apc program")->required();
    run->add_option("--trace", run_args.trace, "JSON-lines trace, or - for stdin")->required();
    run->add_option("--fs", run_args.fs, "VFS manifest");
    run->add_option("--log-file", run_args.log_file, "append log lines to this host file");
    run->add_option("--log-udp", run_args.log_udp, "send log lines to host:port (default: $APATE_LOG_UDP)");
    run->add_option("--cloak", run_args.cloak, "hide this VFS log path from traced processes");
    run->add_option("--report", run_args.report, "write the report here instead of stdout");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "run the copy benchmark");
    bench->add_option("--setting", bench_args.setting, "m1|m2|m3|m4|all")
        ->check(CLI::IsMember({"m1", "m2", "m3", "m4", "all"}));
    bench->add_option("--max-size", bench_args.max_size, "largest file size in bytes")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1'000'000'000}));
    bench->add_option("--reps", bench_args.reps, "repetitions per size")->check(CLI::PositiveNumber);
    bench->add_option("--buffer", bench_args.buffer, "read/write buffer in bytes")->check(CLI::PositiveNumber);
    bench->add_option("--sizes", bench_args.sizes, "number of sizes taken from the schedule")
        ->check(CLI::PositiveNumber);
    bench->add_option("--recurrence", bench_args.recurrence, "previous|second-previous")
        ->check(CLI::IsMember({"previous", "second-previous"}));
    bench->add_option("--out", bench_args.out, "per-repetition CSV (default: stdout)");
    bench->add_option("--summary", bench_args.summary, "per-size summary CSV");
    bench->add_option("--log-file", bench_args.log_file, "log sink for m2/m4");
    bench->add_option("--log-udp", bench_args.log_udp, "UDP log sink for m2/m4 (default: $APATE_LOG_UDP)");

    CLI11_PARSE(app, argc, argv);

    if (compile->parsed()) {
        return cmd_compile(src, out);
    }
    if (run->parsed()) {
        return cmd_run(run_args);
    }
    return cmd_bench(bench_args);
}
