#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>

namespace semcomm::transport {

// Ordered reliable byte streams. Failures raise IoError.
class ByteSink {
public:
    virtual ~ByteSink() = default;
    virtual void write(std::span<const std::uint8_t> bytes) = 0;
    virtual void close() {}
    std::uint64_t bytes_written() const { return written_; }

protected:
    std::uint64_t written_ = 0;
};

class ByteSource {
public:
    virtual ~ByteSource() = default;
    // Blocks until at least one byte is available; 0 means end of stream.
    virtual std::size_t read(std::span<std::uint8_t> buffer) = 0;
};

// Reads until the buffer is full or the stream ends; returns bytes read.
std::size_t read_fully(ByteSource& source, std::span<std::uint8_t> buffer);

// File descriptor stream (file, pipe or socket). Owns the descriptor unless
// constructed with own = false. A positive timeout makes reads that wait
// longer raise IoError("timed out ...").
class FdStream : public ByteSink, public ByteSource {
public:
    FdStream(int fd, bool own, std::chrono::milliseconds read_timeout = std::chrono::milliseconds{0});
    ~FdStream() override;
    FdStream(const FdStream&) = delete;
    FdStream& operator=(const FdStream&) = delete;

    void write(std::span<const std::uint8_t> bytes) override;
    std::size_t read(std::span<std::uint8_t> buffer) override;
    // Shuts down the write side (sockets) or closes the descriptor.
    void close() override;

    int fd() const { return fd_; }

private:
    int fd_;
    bool own_;
    std::chrono::milliseconds timeout_;
};

std::unique_ptr<FdStream> open_file_sink(const std::filesystem::path& path);
std::unique_ptr<FdStream> open_file_source(const std::filesystem::path& path);

// Listens on host:port and accepts one connection, waiting at most
// accept_timeout. Port 0 picks a free port; bound_port receives it before
// the wait begins.
class TcpListener {
public:
    TcpListener(const std::string& host, std::uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    std::unique_ptr<FdStream> accept(std::chrono::milliseconds timeout,
                                     std::chrono::milliseconds read_timeout = std::chrono::milliseconds{0});

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

struct RetryPolicy {
    int attempts = 10;
    std::chrono::milliseconds delay{200};
};

// Connects to host:port, retrying per policy; IoError once attempts run out.
std::unique_ptr<FdStream> tcp_connect(const std::string& host, std::uint16_t port, const RetryPolicy& retry = {});

// Bounded in-process byte pipe. Writers block while `capacity` bytes are
// buffered; readers see end of stream after the writer closes.
class MemoryPipe {
public:
    explicit MemoryPipe(std::size_t capacity = 1 << 20);

    ByteSink& sink() { return sink_; }
    ByteSource& source() { return source_; }
    // Wakes any blocked writer; further writes raise IoError.
    void close_read();

private:
    class Sink : public ByteSink {
    public:
        explicit Sink(MemoryPipe& p) : pipe_(p) {}
        void write(std::span<const std::uint8_t> bytes) override;
        void close() override;

    private:
        MemoryPipe& pipe_;
    };
    class Source : public ByteSource {
    public:
        explicit Source(MemoryPipe& p) : pipe_(p) {}
        std::size_t read(std::span<std::uint8_t> buffer) override;

    private:
        MemoryPipe& pipe_;
    };

    std::size_t capacity_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::uint8_t> buffer_;
    bool write_closed_ = false;
    bool read_closed_ = false;
    Sink sink_{*this};
    Source source_{*this};
};

// Endpoint strings: "file:<path>", "pipe:-" (stdin/stdout), "pipe:<fifo>",
// "tcp:<host>:<port>".
struct Endpoint {
    enum class Kind { file, pipe, tcp } kind = Kind::file;
    std::string path;
    std::string host;
    std::uint16_t port = 0;
};

// Throws ConfigError on an unparseable endpoint.
Endpoint parse_endpoint(const std::string& text);

}  // namespace semcomm::transport
