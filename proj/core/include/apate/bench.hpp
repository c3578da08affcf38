#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apate/log.hpp"
#include "apate/program.hpp"
#include "apate/sandbox.hpp"

namespace apate::bench {

inline constexpr std::uint64_t kDefaultBuffer = 65536;
inline constexpr std::size_t kRulesPerSetting = 50;
inline constexpr std::size_t kConditionsPerRule = 50;

enum class SettingId : std::uint8_t { m1, m2, m3, m4 };

std::string_view setting_name(SettingId id);
std::optional<SettingId> parse_setting(std::string_view name);

/// m1: no interception. m2: one always-true rule [call_orig, log].
/// m3: 50 rules of 50 AND-ed conditions, only the last rule true, [call_orig].
/// m4: m3 plus log.
struct BenchSetting {
    SettingId id = SettingId::m1;
    RuleProgram program;
    bool intercept = false;
};

BenchSetting make_setting(SettingId id);

/// Which earlier term the +1,000,000 branch builds on.
enum class Recurrence : std::uint8_t { previous, second_previous };

/// File sizes 1, 2, 3, ... stepping +1 below 10^6, +1,000 below 10^8 and
/// +10^6 up to 10^9, truncated at max. Throws std::invalid_argument unless
/// 0 < max <= 10^9.
std::vector<std::uint64_t> gen_sizes(std::uint64_t max, Recurrence recurrence = Recurrence::previous);

/// Roughly geometric subsample of a schedule; always keeps the last size.
std::vector<std::uint64_t> subsample_geometric(std::span<const std::uint64_t> sizes, std::size_t count);

struct CopyResult {
    double seconds = 0.0;
    std::uint64_t syscalls = 0;
    std::uint64_t conditions = 0;
    std::uint64_t log_records = 0;
};

/// One copy repetition through `sandbox`: the source file is generated
/// untimed, then open/open/read-write loop/close/close/unlink is timed.
CopyResult run_copy(std::uint64_t size, const BenchSetting& setting, SandboxState& sandbox,
                    std::uint64_t buffer = kDefaultBuffer, std::uint64_t seed = 0);

class TooFewSamples : public std::invalid_argument {
public:
    TooFewSamples() : std::invalid_argument("TooFewSamples: at least 2 samples required") {}
};

struct SampleStats {
    std::size_t n = 0;
    double sd = 0.0;
    double var = 0.0;
    double iqr = 0.0;
    double median = 0.0;
};

/// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Sample sd (n-1), var = sd^2, type-7 iqr and median.
SampleStats stats(std::span<const double> samples);

struct SuiteRow {
    SettingId setting = SettingId::m1;
    std::uint64_t size = 0;
    std::size_t rep = 0;
    CopyResult copy;
};

struct SummaryRow {
    SettingId setting = SettingId::m1;
    std::uint64_t size = 0;
    SampleStats stats;
};

struct SuiteOptions {
    std::size_t reps = 100;
    std::uint64_t buffer = kDefaultBuffer;
    /// Sink used by logging settings; none means records are only counted.
    std::function<std::shared_ptr<LogSink>()> make_sink;
};

/// Runs every (setting, size, rep). Repetitions of one size are interleaved
/// across settings so slow drift in the machine hits all settings alike.
std::vector<SuiteRow> run_suite(std::span<const SettingId> settings, std::span<const std::uint64_t> sizes,
                                const SuiteOptions& options);

std::vector<SummaryRow> summarize(std::span<const SuiteRow> rows);

/// setting,size,rep,runtime_sec,syscalls,conditions
void write_rows_csv(std::ostream& out, std::span<const SuiteRow> rows);
/// setting,size,n,median,sd,var,iqr
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

} // namespace apate::bench
