#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace moo {

struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& m) : std::runtime_error(m) {}
};

/// Bidirectional, ordered, framed byte channel. `send` transmits one
/// complete frame (4-byte big-endian length prefix + payload, already
/// assembled by the caller); `recv` blocks for the next complete frame and
/// returns it prefix included, so both transports carry identical bytes.
/// Throws TransportError on close, peer loss, or malformed prefixes.
/// One reader and one writer thread may use a sink concurrently.
class FrameSink {
  public:
    virtual ~FrameSink() = default;
    virtual void send(const std::string& frame) = 0;
    virtual std::string recv() = 0;
    virtual void close() = 0;
};

/// Two ends of an in-process loopback channel.
std::pair<std::unique_ptr<FrameSink>, std::unique_ptr<FrameSink>> make_inproc_pair();

class TcpListener {
  public:
    /// Binds and listens on host:port. Port 0 picks a free port (see port()).
    TcpListener(const std::string& host, int port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    int port() const { return port_; }
    std::unique_ptr<FrameSink> accept();
    /// Like accept(), but gives up after timeout_ms with a TransportError.
    std::unique_ptr<FrameSink> accept_for(int timeout_ms);
    void close();

  private:
    int fd_ = -1;
    int port_ = 0;
};

/// Connects, retrying until the deadline (the peer may still be starting).
std::unique_ptr<FrameSink> tcp_connect(const std::string& host, int port, int timeout_ms);

} // namespace moo
