#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace apate {

inline constexpr std::size_t kMaxLogLineBytes = 60000;
inline constexpr std::string_view kTruncationMarker = "\xE2\x80\xA6"; // U+2026

/// One logged syscall, rendered as
/// `apate|1|<ts>|<seq>|<pid>|<uid>|<syscall>|<args-json>|<result>`.
struct LogRecord {
    int version = 1;
    std::string timestamp;
    std::uint64_t seq = 0;
    std::int64_t pid = 0;
    std::int64_t uid = 0;
    std::string syscall;
    std::string args_json;
    std::int64_t result = 0;
    bool truncated = false; // args_json was cut and ends with the marker

    friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// ISO-8601 UTC with microseconds, e.g. 2026-10-15T20:57:00.123456Z.
std::string iso8601_utc(std::chrono::system_clock::time_point tp);

/// Renders one line (no newline). Lines that would exceed kMaxLogLineBytes
/// get their args field cut at a UTF-8 boundary and suffixed with the marker.
std::string format_log_line(const LogRecord& record);

std::optional<LogRecord> parse_log_line(std::string_view line);

/// Destination for rendered log lines.
class LogSink {
public:
    virtual ~LogSink() = default;
    virtual void write(std::string_view line) = 0;
    /// Blocks until every accepted line has been handed to the transport.
    virtual void flush() {}
    virtual std::uint64_t dropped() const { return 0; }
};

/// Keeps lines in memory; for tests and reports.
class MemorySink final : public LogSink {
public:
    void write(std::string_view line) override;
    std::vector<std::string> lines() const;

private:
    mutable std::mutex mutex_;
    std::vector<std::string> lines_;
};

/// A byte transport behind a queued sink. send() returns false on failure.
class LogTransport {
public:
    virtual ~LogTransport() = default;
    virtual bool send(std::string_view line) = 0;
    /// Called whenever the queue runs empty.
    virtual void sync() {}
};

/// Bounded queue drained by a worker thread. When the queue is full the
/// line is dropped and counted; writers never block on the transport.
class QueuedSink final : public LogSink {
public:
    static constexpr std::size_t kDefaultCapacity = 4096;

    explicit QueuedSink(std::unique_ptr<LogTransport> transport, std::size_t capacity = kDefaultCapacity);
    ~QueuedSink() override;

    QueuedSink(const QueuedSink&) = delete;
    QueuedSink& operator=(const QueuedSink&) = delete;

    void write(std::string_view line) override;
    void flush() override;
    std::uint64_t dropped() const override { return dropped_.load(); }
    std::uint64_t delivered() const { return delivered_.load(); }

private:
    void run();

    std::unique_ptr<LogTransport> transport_;
    std::size_t capacity_;
    std::mutex mutex_;
    std::condition_variable has_work_;
    std::condition_variable drained_;
    std::deque<std::string> queue_;
    bool in_flight_ = false;
    bool stopping_ = false;
    std::atomic<std::uint64_t> dropped_{0};
    std::atomic<std::uint64_t> delivered_{0};
    std::thread worker_;
};

/// Appends one line per record to a host file. Throws std::runtime_error if
/// the file cannot be opened.
std::shared_ptr<QueuedSink> make_file_sink(const std::string& path,
                                           std::size_t capacity = QueuedSink::kDefaultCapacity);

/// Sends one datagram per record to host:port. Throws std::invalid_argument
/// on an unparsable address; an unreachable peer only produces drops.
std::shared_ptr<QueuedSink> make_udp_sink(const std::string& host_port,
                                          std::size_t capacity = QueuedSink::kDefaultCapacity);

/// Fans records out to sinks and counts them. Copies share the sinks.
class LogHub {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    void add_sink(std::shared_ptr<LogSink> sink);
    void set_clock(Clock clock) { clock_ = std::move(clock); }
    bool has_sinks() const { return !sinks_.empty(); }

    /// Stamps the record, renders it and writes it to every sink. Returns
    /// the rendered line.
    std::string emit(LogRecord record);

    std::uint64_t emitted() const { return emitted_; }
    std::uint64_t dropped() const;
    void flush();

private:
    std::vector<std::shared_ptr<LogSink>> sinks_;
    Clock clock_;
    std::uint64_t emitted_ = 0;
};

} // namespace apate
