#include "moo/transport.hpp"

#include "moo/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace moo {

namespace {

// ---------------------------------------------------------------------------
// In-process loopback: two sinks sharing a pair of frame queues.

struct InprocQueue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> frames;
    bool closed = false;

    void push(std::string f) {
        {
            std::lock_guard<std::mutex> lk(mu);
            if (closed) throw TransportError("connection closed");
            frames.push_back(std::move(f));
        }
        cv.notify_one();
    }
    std::string pop() {
        std::unique_lock<std::mutex> lk(mu);
        cv.wait(lk, [&] { return !frames.empty() || closed; });
        if (frames.empty()) throw TransportError("connection closed");
        std::string f = std::move(frames.front());
        frames.pop_front();
        return f;
    }
    void close() {
        {
            std::lock_guard<std::mutex> lk(mu);
            closed = true;
        }
        cv.notify_all();
    }
};

class InprocSink final : public FrameSink {
  public:
    InprocSink(std::shared_ptr<InprocQueue> in, std::shared_ptr<InprocQueue> out)
        : in_(std::move(in)), out_(std::move(out)) {}
    ~InprocSink() override { close(); }

    void send(const std::string& frame) override {
        if (frame.size() < 4) throw TransportError("malformed frame: missing prefix");
        out_->push(frame);
    }
    std::string recv() override { return in_->pop(); }
    void close() override {
        in_->close();
        out_->close();
    }

  private:
    std::shared_ptr<InprocQueue> in_, out_;
};

// ---------------------------------------------------------------------------
// TCP

void write_all(int fd, const char* p, size_t n) {
    while (n > 0) {
        ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
        if (k < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("send failed: ") + std::strerror(errno));
        }
        p += k;
        n -= static_cast<size_t>(k);
    }
}

bool read_all(int fd, char* p, size_t n) {  // false on clean EOF at a boundary
    size_t got = 0;
    while (got < n) {
        ssize_t k = ::recv(fd, p + got, n - got, 0);
        if (k < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("recv failed: ") + std::strerror(errno));
        }
        if (k == 0) {
            if (got == 0) return false;
            throw TransportError("connection closed mid-frame");
        }
        got += static_cast<size_t>(k);
    }
    return true;
}

class TcpSink final : public FrameSink {
  public:
    explicit TcpSink(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~TcpSink() override {
        close();
        ::close(fd_);
    }

    void send(const std::string& frame) override {
        std::lock_guard<std::mutex> lk(wmu_);
        if (closed_) throw TransportError("connection closed");
        write_all(fd_, frame.data(), frame.size());
    }

    std::string recv() override {
        char hdr[4];
        if (closed_ || !read_all(fd_, hdr, 4)) throw TransportError("connection closed");
        uint32_t n = (static_cast<uint32_t>(static_cast<unsigned char>(hdr[0])) << 24) |
                     (static_cast<uint32_t>(static_cast<unsigned char>(hdr[1])) << 16) |
                     (static_cast<uint32_t>(static_cast<unsigned char>(hdr[2])) << 8) |
                     static_cast<uint32_t>(static_cast<unsigned char>(hdr[3]));
        if (n > kMaxPayloadBytes) throw TransportError("frame exceeds the 16 MiB limit");
        std::string frame(4 + static_cast<size_t>(n), '\0');
        std::memcpy(frame.data(), hdr, 4);
        if (n > 0 && !read_all(fd_, frame.data() + 4, n))
            throw TransportError("connection closed mid-frame");
        return frame;
    }

    // Shutdown-only: the fd stays owned until destruction so a reader
    // blocked in recv() wakes on EOF instead of racing a reused descriptor.
    void close() override {
        if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
    }

  private:
    int fd_;
    std::mutex wmu_;
    std::atomic<bool> closed_{false};
};

int resolve_and_connect(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res)
        return -1;
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    return fd;
}

} // namespace

std::pair<std::unique_ptr<FrameSink>, std::unique_ptr<FrameSink>> make_inproc_pair() {
    auto a2b = std::make_shared<InprocQueue>();
    auto b2a = std::make_shared<InprocQueue>();
    return {std::make_unique<InprocSink>(b2a, a2b), std::make_unique<InprocSink>(a2b, b2a)};
}

TcpListener::TcpListener(const std::string& host, int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw TransportError("cannot create socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (host.empty() || host == "0.0.0.0") {
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
    } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw TransportError("cannot parse listen address '" + host + "'");
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        std::string e = std::strerror(errno);
        ::close(fd_);
        throw TransportError("cannot bind " + host + ":" + std::to_string(port) + ": " + e);
    }
    if (::listen(fd_, 16) != 0) {
        std::string e = std::strerror(errno);
        ::close(fd_);
        throw TransportError("cannot listen: " + e);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<FrameSink> TcpListener::accept() {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw TransportError(std::string("accept failed: ") + std::strerror(errno));
    return std::make_unique<TcpSink>(fd);
}

std::unique_ptr<FrameSink> TcpListener::accept_for(int timeout_ms) {
    pollfd pfd{fd_, POLLIN, 0};
    int r;
    do {
        r = ::poll(&pfd, 1, timeout_ms);
    } while (r < 0 && errno == EINTR);
    if (r == 0) throw TransportError("timed out waiting for an incoming connection");
    if (r < 0) throw TransportError(std::string("poll failed: ") + std::strerror(errno));
    return accept();
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::unique_ptr<FrameSink> tcp_connect(const std::string& host, int port, int timeout_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        int fd = resolve_and_connect(host, port);
        if (fd >= 0) return std::make_unique<TcpSink>(fd);
        if (std::chrono::steady_clock::now() >= deadline)
            throw TransportError("cannot connect to " + host + ":" + std::to_string(port));
        std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
}

} // namespace moo
