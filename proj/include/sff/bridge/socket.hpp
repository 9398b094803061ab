#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sff::bridge {

class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PortBindError : public BridgeError {
 public:
  PortBindError(const std::string& what, std::uint16_t port)
      : BridgeError(what), port_(port) {}
  std::uint16_t port() const { return port_; }

 private:
  std::uint16_t port_;
};

class ConnectError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

class TransportClosedError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

/// Binds and listens on host:port; returns the listening fd.
int tcp_listen(const std::string& host, std::uint16_t port);

/// Accepts one connection (TCP_NODELAY set); returns -1 once the listening
/// socket is shut down.
int tcp_accept(int listen_fd);

/// Connects with retries until the deadline; throws ConnectError.
int tcp_connect(const std::string& host, std::uint16_t port, int timeout_ms);

void shutdown_fd(int fd);
void close_fd(int fd);

bool send_all(int fd, const char* data, std::size_t len);

/// Prepends the 4-byte big-endian length to a frame body.
std::string frame_encode(std::string_view body);

/// Incremental length-prefixed frame extraction from a stream socket.
class FrameReader {
 public:
  /// Blocking read; appends any completed frame bodies to `frames`.
  /// Returns false on EOF or error. Oversized frames (> 64 MiB) fail.
  bool poll(int fd, std::vector<std::string>& frames);

 private:
  std::vector<char> buf_;
  std::size_t parsed_{0};
};

}  // namespace sff::bridge
