#include "semcomm/transport/stream.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <thread>

#include <spdlog/spdlog.h>

#include "semcomm/core/errors.h"

namespace semcomm::transport {
namespace {

std::string errno_text()
{
    return std::strerror(errno);
}

// Waits until fd is readable; false on timeout.
bool wait_readable(int fd, std::chrono::milliseconds timeout)
{
    pollfd p{fd, POLLIN, 0};
    while (true) {
        const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (rc > 0) return true;
        if (rc == 0) return false;
        if (errno != EINTR) throw IoError("poll failed: " + errno_text());
    }
}

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res);
    if (rc != 0) throw IoError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    return res;
}

}  // namespace

std::size_t read_fully(ByteSource& source, std::span<std::uint8_t> buffer)
{
    std::size_t got = 0;
    while (got < buffer.size()) {
        const std::size_t n = source.read(buffer.subspan(got));
        if (n == 0) break;
        got += n;
    }
    return got;
}

FdStream::FdStream(int fd, bool own, std::chrono::milliseconds read_timeout)
    : fd_(fd), own_(own), timeout_(read_timeout)
{
}

FdStream::~FdStream()
{
    if (own_ && fd_ >= 0) ::close(fd_);
}

void FdStream::write(std::span<const std::uint8_t> bytes)
{
    if (fd_ < 0) throw IoError("write on a closed stream");
    std::size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
        if (n < 0 && errno == ENOTSOCK) {
            const ssize_t m = ::write(fd_, bytes.data() + done, bytes.size() - done);
            if (m < 0) {
                if (errno == EINTR) continue;
                throw IoError("write failed: " + errno_text());
            }
            done += static_cast<std::size_t>(m);
            continue;
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("write failed: " + errno_text());
        }
        done += static_cast<std::size_t>(n);
    }
    written_ += bytes.size();
}

std::size_t FdStream::read(std::span<std::uint8_t> buffer)
{
    if (fd_ < 0) return 0;
    if (buffer.empty()) return 0;
    while (true) {
        if (timeout_.count() > 0 && !wait_readable(fd_, timeout_)) {
            throw IoError("timed out after " + std::to_string(timeout_.count()) + " ms waiting for data");
        }
        const ssize_t n = ::read(fd_, buffer.data(), buffer.size());
        if (n >= 0) return static_cast<std::size_t>(n);
        if (errno == EINTR) continue;
        throw IoError("read failed: " + errno_text());
    }
}

void FdStream::close()
{
    if (fd_ < 0) return;
    if (::shutdown(fd_, SHUT_WR) == 0) return;
    if (own_) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::unique_ptr<FdStream> open_file_sink(const std::filesystem::path& path)
{
    if (path == "-") return std::make_unique<FdStream>(STDOUT_FILENO, false);
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot open " + path.string() + " for writing: " + errno_text());
    return std::make_unique<FdStream>(fd, true);
}

std::unique_ptr<FdStream> open_file_source(const std::filesystem::path& path)
{
    if (path == "-") return std::make_unique<FdStream>(STDIN_FILENO, false);
    const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) throw IoError("cannot open " + path.string() + ": " + errno_text());
    return std::make_unique<FdStream>(fd, true);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port)
{
    addrinfo* res = resolve(host, port, true);
    std::string last_error = "no usable address";
    for (addrinfo* a = res; a; a = a->ai_next) {
        const int fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 1) == 0) {
            fd_ = fd;
            break;
        }
        last_error = errno_text();
        ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw IoError("cannot listen on " + host + ":" + std::to_string(port) + ": " + last_error);

    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                       : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener()
{
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FdStream> TcpListener::accept(std::chrono::milliseconds timeout, std::chrono::milliseconds read_timeout)
{
    if (!wait_readable(fd_, timeout)) {
        throw IoError("timed out after " + std::to_string(timeout.count()) + " ms waiting for a connection on port " +
                      std::to_string(port_));
    }
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) throw IoError("accept failed: " + errno_text());
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<FdStream>(fd, true, read_timeout);
}

std::unique_ptr<FdStream> tcp_connect(const std::string& host, std::uint16_t port, const RetryPolicy& retry)
{
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, retry.attempts); ++attempt) {
        addrinfo* res = resolve(host, port, false);
        for (addrinfo* a = res; a; a = a->ai_next) {
            const int fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
                ::freeaddrinfo(res);
                const int one = 1;
                ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
                return std::make_unique<FdStream>(fd, true);
            }
            last_error = errno_text();
            ::close(fd);
        }
        ::freeaddrinfo(res);
        spdlog::debug("connect to {}:{} failed (attempt {}/{}): {}", host, port, attempt, retry.attempts, last_error);
        if (attempt < retry.attempts) std::this_thread::sleep_for(retry.delay);
    }
    throw IoError("cannot connect to " + host + ":" + std::to_string(port) + " after " +
                  std::to_string(retry.attempts) + " attempts: " + last_error);
}

MemoryPipe::MemoryPipe(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

void MemoryPipe::close_read()
{
    std::lock_guard lock(mutex_);
    read_closed_ = true;
    cv_.notify_all();
}

void MemoryPipe::Sink::write(std::span<const std::uint8_t> bytes)
{
    auto& p = pipe_;
    std::size_t done = 0;
    std::unique_lock lock(p.mutex_);
    while (done < bytes.size()) {
        p.cv_.wait(lock, [&] { return p.read_closed_ || p.buffer_.size() < p.capacity_; });
        if (p.read_closed_) throw IoError("write to a pipe whose reader has gone");
        if (p.write_closed_) throw IoError("write after close");
        const std::size_t n = std::min(bytes.size() - done, p.capacity_ - p.buffer_.size());
        p.buffer_.insert(p.buffer_.end(), bytes.begin() + done, bytes.begin() + done + n);
        done += n;
        p.cv_.notify_all();
    }
    written_ += bytes.size();
}

void MemoryPipe::Sink::close()
{
    std::lock_guard lock(pipe_.mutex_);
    pipe_.write_closed_ = true;
    pipe_.cv_.notify_all();
}

std::size_t MemoryPipe::Source::read(std::span<std::uint8_t> buffer)
{
    auto& p = pipe_;
    std::unique_lock lock(p.mutex_);
    p.cv_.wait(lock, [&] { return !p.buffer_.empty() || p.write_closed_; });
    const std::size_t n = std::min(buffer.size(), p.buffer_.size());
    std::copy_n(p.buffer_.begin(), n, buffer.begin());
    p.buffer_.erase(p.buffer_.begin(), p.buffer_.begin() + static_cast<std::ptrdiff_t>(n));
    p.cv_.notify_all();
    return n;
}

Endpoint parse_endpoint(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("endpoint '" + text + "' needs a file:, pipe: or tcp: prefix");
    const std::string scheme = text.substr(0, colon), rest = text.substr(colon + 1);
    Endpoint e;
    if (scheme == "file" || scheme == "pipe") {
        if (rest.empty()) throw ConfigError("endpoint '" + text + "' has an empty path");
        e.kind = scheme == "file" ? Endpoint::Kind::file : Endpoint::Kind::pipe;
        e.path = rest;
        return e;
    }
    if (scheme == "tcp") {
        const auto pc = rest.rfind(':');
        if (pc == std::string::npos) throw ConfigError("tcp endpoint '" + text + "' needs host:port");
        e.kind = Endpoint::Kind::tcp;
        e.host = rest.substr(0, pc);
        try {
            const int port = std::stoi(rest.substr(pc + 1));
            if (port < 0 || port > 65535) throw std::out_of_range("port");
            e.port = static_cast<std::uint16_t>(port);
        } catch (const std::exception&) {
            throw ConfigError("tcp endpoint '" + text + "' has an invalid port");
        }
        return e;
    }
    throw ConfigError("unknown endpoint scheme '" + scheme + "'");
}

}  // namespace semcomm::transport
