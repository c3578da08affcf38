#include "apate/log.hpp"

#include <charconv>
#include <ctime>

#include <json.hpp>

namespace apate {

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    using namespace std::chrono;
    const auto us = duration_cast<microseconds>(tp.time_since_epoch()).count();
    auto secs = static_cast<std::time_t>(us / 1000000);
    auto frac = us % 1000000;
    if (frac < 0) {
        frac += 1000000;
        --secs;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(frac));
    return buf;
}

namespace {

std::size_t utf8_boundary(std::string_view text, std::size_t cut) {
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
        --cut;
    }
    return cut;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
    if (text.empty()) {
        return false;
    }
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

} // namespace

std::string format_log_line(const LogRecord& r) {
    std::string head = "apate|" + std::to_string(r.version) + "|" + r.timestamp + "|" + std::to_string(r.seq) + "|" +
                       std::to_string(r.pid) + "|" + std::to_string(r.uid) + "|" + r.syscall + "|";
    std::string tail = "|" + std::to_string(r.result);
    std::string_view args = r.args_json;
    const auto fixed = head.size() + tail.size();
    std::string line;
    if (fixed + args.size() <= kMaxLogLineBytes) {
        line.reserve(fixed + args.size());
        line.append(head).append(args).append(tail);
        return line;
    }
    const auto budget = kMaxLogLineBytes > fixed + kTruncationMarker.size()
                            ? kMaxLogLineBytes - fixed - kTruncationMarker.size()
                            : 0;
    const auto cut = utf8_boundary(args, std::min(budget, args.size()));
    line.reserve(kMaxLogLineBytes);
    line.append(head).append(args.substr(0, cut)).append(kTruncationMarker).append(tail);
    return line;
}

std::optional<LogRecord> parse_log_line(std::string_view line) {
    std::array<std::string_view, 7> head{};
    std::size_t pos = 0;
    for (auto& field : head) {
        const auto bar = line.find('|', pos);
        if (bar == std::string_view::npos) {
            return std::nullopt;
        }
        field = line.substr(pos, bar - pos);
        pos = bar + 1;
    }
    const auto last = line.rfind('|');
    if (last == std::string_view::npos || last < pos) {
        return std::nullopt;
    }
    if (head[0] != "apate") {
        return std::nullopt;
    }
    LogRecord r;
    r.timestamp = std::string(head[2]);
    r.syscall = std::string(head[6]);
    r.args_json = std::string(line.substr(pos, last - pos));
    if (!parse_int(head[1], r.version) || !parse_int(head[3], r.seq) || !parse_int(head[4], r.pid) ||
        !parse_int(head[5], r.uid) || !parse_int(line.substr(last + 1), r.result)) {
        return std::nullopt;
    }
    r.truncated = r.args_json.ends_with(kTruncationMarker);
    if (!r.truncated && !nlohmann::json::accept(r.args_json)) {
        return std::nullopt;
    }
    return r;
}

void MemorySink::write(std::string_view line) {
    std::lock_guard lock(mutex_);
    lines_.emplace_back(line);
}

std::vector<std::string> MemorySink::lines() const {
    std::lock_guard lock(mutex_);
    return lines_;
}

void LogHub::add_sink(std::shared_ptr<LogSink> sink) {
    if (sink) {
        sinks_.push_back(std::move(sink));
    }
}

std::string LogHub::emit(LogRecord record) {
    record.timestamp = iso8601_utc(clock_ ? clock_() : std::chrono::system_clock::now());
    auto line = format_log_line(record);
    for (const auto& sink : sinks_) {
        sink->write(line);
    }
    ++emitted_;
    return line;
}

std::uint64_t LogHub::dropped() const {
    std::uint64_t total = 0;
    for (const auto& sink : sinks_) {
        total += sink->dropped();
    }
    return total;
}

void LogHub::flush() {
    for (const auto& sink : sinks_) {
        sink->flush();
    }
}

} // namespace apate
