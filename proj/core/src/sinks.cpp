#include <cstdio>
#include <cstring>
#include <stdexcept>

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include "apate/log.hpp"

namespace apate {

QueuedSink::QueuedSink(std::unique_ptr<LogTransport> transport, std::size_t capacity)
    : transport_(std::move(transport)), capacity_(capacity == 0 ? 1 : capacity), worker_([this] { run(); }) {}

QueuedSink::~QueuedSink() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    has_work_.notify_all();
    worker_.join();
}

void QueuedSink::write(std::string_view line) {
    {
        std::lock_guard lock(mutex_);
        if (queue_.size() >= capacity_) {
            ++dropped_;
            return;
        }
        queue_.emplace_back(line);
    }
    has_work_.notify_one();
}

void QueuedSink::flush() {
    std::unique_lock lock(mutex_);
    drained_.wait(lock, [this] { return queue_.empty() && !in_flight_; });
}

void QueuedSink::run() {
    std::unique_lock lock(mutex_);
    for (;;) {
        has_work_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) {
            break; // stopping and drained
        }
        std::string line = std::move(queue_.front());
        queue_.pop_front();
        in_flight_ = true;
        lock.unlock();
        if (transport_->send(line)) {
            ++delivered_;
        } else {
            ++dropped_;
        }
        lock.lock();
        in_flight_ = false;
        if (queue_.empty()) {
            lock.unlock();
            transport_->sync();
            lock.lock();
            drained_.notify_all();
        }
    }
    drained_.notify_all();
}

namespace {

class FileTransport final : public LogTransport {
public:
    explicit FileTransport(const std::string& path) : file_(std::fopen(path.c_str(), "ab")) {
        if (file_ == nullptr) {
            throw std::runtime_error("cannot open log file " + path + ": " + std::strerror(errno));
        }
    }
    ~FileTransport() override { std::fclose(file_); }

    FileTransport(const FileTransport&) = delete;
    FileTransport& operator=(const FileTransport&) = delete;

    bool send(std::string_view line) override {
        return std::fwrite(line.data(), 1, line.size(), file_) == line.size() && std::fputc('\n', file_) != EOF;
    }
    void sync() override { std::fflush(file_); }

private:
    std::FILE* file_;
};

class UdpTransport final : public LogTransport {
public:
    UdpTransport(const std::string& host, const std::string& port) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_DGRAM;
        addrinfo* res = nullptr;
        if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
            return; // every send fails and is counted as a drop
        }
        fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        if (fd_ >= 0) {
            std::memcpy(&addr_, res->ai_addr, res->ai_addrlen);
            addr_len_ = res->ai_addrlen;
        }
        freeaddrinfo(res);
    }
    ~UdpTransport() override {
        if (fd_ >= 0) {
            ::close(fd_);
        }
    }

    UdpTransport(const UdpTransport&) = delete;
    UdpTransport& operator=(const UdpTransport&) = delete;

    bool send(std::string_view line) override {
        if (fd_ < 0) {
            return false;
        }
        const auto n = ::sendto(fd_, line.data(), line.size(), MSG_DONTWAIT,
                                reinterpret_cast<const sockaddr*>(&addr_), addr_len_);
        return n == static_cast<ssize_t>(line.size());
    }

private:
    int fd_ = -1;
    sockaddr_storage addr_{};
    socklen_t addr_len_ = 0;
};

} // namespace

std::shared_ptr<QueuedSink> make_file_sink(const std::string& path, std::size_t capacity) {
    return std::make_shared<QueuedSink>(std::make_unique<FileTransport>(path), capacity);
}

std::shared_ptr<QueuedSink> make_udp_sink(const std::string& host_port, std::size_t capacity) {
    const auto colon = host_port.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == host_port.size()) {
        throw std::invalid_argument("expected host:port, got '" + host_port + "'");
    }
    auto host = host_port.substr(0, colon);
    const auto port = host_port.substr(colon + 1);
    for (char c : port) {
        if (c < '0' || c > '9') {
            throw std::invalid_argument("port must be numeric in '" + host_port + "'");
        }
    }
    if (std::stoul(port) > 65535) {
        throw std::invalid_argument("port out of range in '" + host_port + "'");
    }
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') {
        host = host.substr(1, host.size() - 2);
    }
    return std::make_shared<QueuedSink>(std::make_unique<UdpTransport>(host, port), capacity);
}

} // namespace apate
