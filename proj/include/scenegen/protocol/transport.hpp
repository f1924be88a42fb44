#pragma once
// Newline-delimited byte streams over POSIX TCP sockets.

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <string>
#include <utility>

#include "scenegen/errors.hpp"

namespace scenegen::protocol {

inline constexpr int kDefaultTimeoutMs = 5000;
inline constexpr std::size_t kMaxLineBytes = 16 << 20;

class TransportError : public Error {
 public:
  using Error::Error;
};

class ConnectError : public TransportError {
 public:
  using TransportError::TransportError;
};

class TimeoutError : public TransportError {
 public:
  TimeoutError(const std::string& what, int step = -1)
      : TransportError(step >= 0 ? what + " at step " + std::to_string(step) : what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Accepts "host:port" or "tcp://host:port".
inline Endpoint parse_endpoint(std::string s) {
  if (s.rfind("tcp://", 0) == 0) s = s.substr(6);
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon + 1 == s.size()) throw ConnectError("endpoint needs host:port: " + s);
  Endpoint e;
  e.host = colon == 0 ? "127.0.0.1" : s.substr(0, colon);
  try {
    std::size_t used = 0;
    e.port = std::stoi(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("port");
  } catch (const std::exception&) {
    throw ConnectError("bad port in endpoint: " + s);
  }
  if (e.port < 0 || e.port > 65535) throw ConnectError("port out of range: " + s);
  return e;
}

namespace detail {

inline sockaddr_in resolve(const Endpoint& e) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(e.port));
  if (inet_pton(AF_INET, e.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{}, *res = nullptr;
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (getaddrinfo(e.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw ConnectError("cannot resolve host '" + e.host + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

/// Waits for `events` on fd; false on timeout.
inline bool wait_fd(int fd, short events, int timeoutMs) {
  pollfd p{fd, events, 0};
  for (;;) {
    const int r = ::poll(&p, 1, timeoutMs);
    if (r >= 0) return r > 0;
    if (errno != EINTR) throw TransportError(std::string("poll: ") + std::strerror(errno));
  }
}

}  // namespace detail

/// Owning socket with line framing.
class LineStream {
 public:
  LineStream() = default;
  explicit LineStream(int fd) : fd_(fd) {}
  LineStream(LineStream&& o) noexcept : fd_(std::exchange(o.fd_, -1)), buf_(std::move(o.buf_)) {}
  LineStream& operator=(LineStream&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
      buf_ = std::move(o.buf_);
    }
    return *this;
  }
  ~LineStream() { close(); }

  bool is_open() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  /// Sends `line`, which must end in a newline.
  void write_line(const std::string& line) {
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::send(fd_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("send: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next line without its newline; nullopt on end of stream. Throws
  /// TimeoutError if no complete line arrives within `timeoutMs`.
  std::optional<std::string> read_line(int timeoutMs) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(timeoutMs);
    for (;;) {
      if (auto nl = buf_.find('\n'); nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      if (buf_.size() > kMaxLineBytes) throw TransportError("line too long");
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      if (left <= 0 || !detail::wait_fd(fd_, POLLIN, static_cast<int>(left)))
        throw TimeoutError("no message within " + std::to_string(timeoutMs) + " ms");
      char chunk[65536];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == ECONNRESET) return std::nullopt;
        throw TransportError(std::string("recv: ") + std::strerror(errno));
      }
      if (n == 0) return std::nullopt;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  /// True if a complete line is already buffered.
  bool has_buffered_line() const { return buf_.find('\n') != std::string::npos; }

 private:
  int fd_ = -1;
  std::string buf_;
};

inline LineStream connect_tcp(const Endpoint& e, int timeoutMs = kDefaultTimeoutMs) {
  const sockaddr_in addr = detail::resolve(e);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ConnectError(std::string("socket: ") + std::strerror(errno));
  LineStream s(fd);
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    if (errno != EINPROGRESS) throw ConnectError("connect to " + e.str() + ": " + std::strerror(errno));
    if (!detail::wait_fd(fd, POLLOUT, timeoutMs)) throw ConnectError("connect to " + e.str() + " timed out");
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw ConnectError("connect to " + e.str() + ": " + std::strerror(err));
  }
  ::fcntl(fd, F_SETFL, flags);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

class Listener {
 public:
  /// Binds and listens; port 0 picks a free port.
  explicit Listener(const Endpoint& e) {
    const sockaddr_in addr = detail::resolve(e);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw ConnectError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
      const std::string why = std::strerror(errno);
      ::close(fd_);
      throw ConnectError("bind " + e.str() + ": " + why);
    }
    if (::listen(fd_, 8) != 0) {
      const std::string why = std::strerror(errno);
      ::close(fd_);
      throw ConnectError("listen: " + why);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    endpoint_ = {e.host, ntohs(bound.sin_port)};
  }
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener() {
    if (fd_ >= 0) ::close(fd_);
  }

  const Endpoint& endpoint() const { return endpoint_; }
  int fd() const { return fd_; }

  /// Accepts one connection; nullopt on timeout (negative waits forever).
  std::optional<LineStream> accept(int timeoutMs) {
    if (!detail::wait_fd(fd_, POLLIN, timeoutMs)) return std::nullopt;
    const int c = ::accept(fd_, nullptr, nullptr);
    if (c < 0) throw TransportError(std::string("accept: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(c, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return LineStream(c);
  }

 private:
  int fd_ = -1;
  Endpoint endpoint_;
};

}  // namespace scenegen::protocol
