#include "catch_amalgamated.hpp"

#include <cstdio>
#include <filesystem>
#include <future>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "apate/log.hpp"
#include "test_support.hpp"

using namespace apate;

namespace {

LogRecord sample() {
    LogRecord r;
    r.timestamp = "2026-10-15T12:00:00.000001Z";
    r.seq = 7;
    r.pid = 4242;
    r.uid = 1000;
    r.syscall = "open";
    r.args_json = R"(["/etc/passwd",0])";
    r.result = 3;
    return r;
}

// Holds every send until released.
class GatedTransport final : public LogTransport {
public:
    explicit GatedTransport(std::shared_future<void> gate) : gate_(std::move(gate)) {}
    bool send(std::string_view) override {
        gate_.wait();
        return true;
    }

private:
    std::shared_future<void> gate_;
};

class FailingTransport final : public LogTransport {
public:
    bool send(std::string_view) override { return false; }
};

} // namespace

TEST_CASE("line format is byte exact") {
    CHECK(format_log_line(sample()) ==
          R"(apate|1|2026-10-15T12:00:00.000001Z|7|4242|1000|open|["/etc/passwd",0]|3)");
}

TEST_CASE("iso8601 timestamps carry microseconds") {
    using namespace std::chrono;
    const system_clock::time_point tp{seconds{1'000'000'000} + microseconds{42}};
    CHECK(iso8601_utc(tp) == "2001-09-09T01:46:40.000042Z");
    CHECK(iso8601_utc(system_clock::time_point{}) == "1970-01-01T00:00:00.000000Z");
}

TEST_CASE("parse inverts format") {
    const auto r = sample();
    auto parsed = parse_log_line(format_log_line(r));
    REQUIRE(parsed);
    CHECK(*parsed == r);
    CHECK_FALSE(parse_log_line("nope|1|t|1|1|1|open|[]|0"));
    CHECK_FALSE(parse_log_line("apate|1|t|x|1|1|open|[]|0"));
    CHECK_FALSE(parse_log_line("apate|1|t|1|1|1|open|[oops|0"));
    CHECK_FALSE(parse_log_line("apate|1"));
}

TEST_CASE("args containing the separator survive the round trip") {
    auto r = sample();
    r.args_json = R"(["a|b|c"])";
    auto parsed = parse_log_line(format_log_line(r));
    REQUIRE(parsed);
    CHECK(parsed->args_json == r.args_json);
}

TEST_CASE("randomized records round-trip") {
    test::Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        LogRecord r = sample();
        r.seq = static_cast<std::uint64_t>(test::uniform(rng, 0, 1'000'000));
        r.pid = test::uniform(rng, 1, 99999);
        r.uid = test::uniform(rng, 0, 65535);
        r.result = test::uniform(rng, -40, 1 << 20);
        std::string s;
        for (int k = test::uniform(rng, 0, 20); k > 0; --k) {
            s.push_back(static_cast<char>(test::uniform(rng, 32, 126)));
        }
        r.args_json = std::string("[") + "\"" + (s.find_first_of("\"\\") == std::string::npos ? s : "x") + "\"]";
        auto parsed = parse_log_line(format_log_line(r));
        REQUIRE(parsed);
        CHECK(*parsed == r);
    }
}

TEST_CASE("100 KB argument is truncated under the datagram limit") {
    auto r = sample();
    r.args_json = "[\"" + std::string(100 * 1024, 'a') + "\"]";
    const auto line = format_log_line(r);
    CHECK(line.size() <= kMaxLogLineBytes);
    CHECK(line.size() > kMaxLogLineBytes - 8);
    auto parsed = parse_log_line(line);
    REQUIRE(parsed);
    CHECK(parsed->truncated);
    CHECK(parsed->args_json.ends_with(kTruncationMarker));
    CHECK(r.args_json.starts_with(parsed->args_json.substr(0, parsed->args_json.size() - kTruncationMarker.size())));
}

TEST_CASE("truncation never splits a UTF-8 sequence") {
    auto r = sample();
    std::string big = "[\"";
    while (big.size() < 70000) {
        big += "\xC3\xA9"; // e acute
    }
    big += "\"]";
    r.args_json = big;
    const auto line = format_log_line(r);
    CHECK(line.size() <= kMaxLogLineBytes);
    auto parsed = parse_log_line(line);
    REQUIRE(parsed);
    const auto body = parsed->args_json.substr(0, parsed->args_json.size() - kTruncationMarker.size());
    CHECK((static_cast<unsigned char>(body.back()) & 0xC0) != 0xC0);
    CHECK((body.size() - 2) % 2 == 0);
}

TEST_CASE("hub stamps, fans out and counts") {
    LogHub hub;
    auto a = std::make_shared<MemorySink>();
    auto b = std::make_shared<MemorySink>();
    hub.add_sink(a);
    hub.add_sink(b);
    hub.add_sink(nullptr);
    hub.set_clock([] { return std::chrono::system_clock::time_point{}; });
    const auto line = hub.emit(sample());
    CHECK(line.find("|1970-01-01T00:00:00.000000Z|") != std::string::npos);
    CHECK(a->lines() == std::vector<std::string>{line});
    CHECK(b->lines() == a->lines());
    CHECK(hub.emitted() == 1);
    CHECK(hub.dropped() == 0);
}

TEST_CASE("queued sink drops when full and never blocks the writer") {
    std::promise<void> release;
    auto sink = std::make_shared<QueuedSink>(std::make_unique<GatedTransport>(release.get_future().share()), 2);
    for (int i = 0; i < 10; ++i) {
        sink->write("line");
    }
    // One line may be in flight, two queued; the rest are dropped.
    CHECK(sink->dropped() >= 7);
    CHECK(sink->dropped() <= 8);
    release.set_value();
    sink->flush();
    CHECK(sink->delivered() + sink->dropped() == 10);
}

TEST_CASE("transport failures are counted as drops") {
    QueuedSink sink(std::make_unique<FailingTransport>());
    sink.write("a");
    sink.write("b");
    sink.flush();
    CHECK(sink.dropped() == 2);
    CHECK(sink.delivered() == 0);
}

TEST_CASE("file sink writes one line per record") {
    const auto path = std::filesystem::temp_directory_path() / ("apate_log_test_" + std::to_string(::getpid()));
    std::filesystem::remove(path);
    {
        LogHub hub;
        hub.add_sink(make_file_sink(path.string()));
        for (int i = 0; i < 10; ++i) {
            auto r = sample();
            r.seq = static_cast<std::uint64_t>(i);
            hub.emit(r);
        }
        hub.flush();
    }
    const auto text = test::read_file(path.string());
    std::filesystem::remove(path);
    std::size_t lines = 0;
    std::size_t pos = 0;
    while ((pos = text.find('\n', pos)) != std::string::npos) {
        ++lines;
        ++pos;
    }
    CHECK(lines == 10);
    const auto first = text.substr(0, text.find('\n'));
    auto parsed = parse_log_line(first);
    REQUIRE(parsed);
    CHECK(parsed->seq == 0);
    CHECK_THROWS(make_file_sink("/nonexistent-dir/x/y.log"));
}

TEST_CASE("udp sink sends one datagram per record") {
    const int rx = ::socket(AF_INET, SOCK_DGRAM, 0);
    REQUIRE(rx >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(rx, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    socklen_t len = sizeof addr;
    REQUIRE(::getsockname(rx, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    const auto port = ntohs(addr.sin_port);
    {
        auto sink = make_udp_sink("127.0.0.1:" + std::to_string(port));
        sink->write("apate|first");
        sink->write("apate|second");
        sink->flush();
        CHECK(sink->delivered() == 2);
    }
    char buf[128];
    const auto n1 = ::recv(rx, buf, sizeof buf, 0);
    CHECK(std::string(buf, static_cast<std::size_t>(n1)) == "apate|first");
    const auto n2 = ::recv(rx, buf, sizeof buf, 0);
    CHECK(std::string(buf, static_cast<std::size_t>(n2)) == "apate|second");
    ::close(rx);
}

TEST_CASE("udp sink address validation") {
    CHECK_THROWS_AS(make_udp_sink("nohost"), std::invalid_argument);
    CHECK_THROWS_AS(make_udp_sink("host:"), std::invalid_argument);
    CHECK_THROWS_AS(make_udp_sink("host:abc"), std::invalid_argument);
    CHECK_THROWS_AS(make_udp_sink("host:70000"), std::invalid_argument);
    CHECK_NOTHROW(make_udp_sink("[::1]:9"));
}

TEST_CASE("unresolvable udp peer only produces drops") {
    auto sink = make_udp_sink("no-such-host.invalid:9");
    sink->write("x");
    sink->flush();
    CHECK(sink->dropped() == 1);
}
