#include "sff/bridge/socket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace sff::bridge {

namespace {

constexpr std::size_t kMaxFrame = 64ull * 1024 * 1024;

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw BridgeError("bad host address: " + host);
  }
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

int tcp_listen(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw BridgeError("socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_addr(host, port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd);
    throw PortBindError("cannot bind port " + std::to_string(port) + ": " +
                            std::strerror(err),
                        port);
  }
  if (::listen(fd, 64) != 0) {
    ::close(fd);
    throw PortBindError("listen failed on port " + std::to_string(port), port);
  }
  return fd;
}

int tcp_accept(int listen_fd) {
  for (;;) {
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) {
      set_nodelay(fd);
      return fd;
    }
    if (errno == EINTR) continue;
    return -1;
  }
}

int tcp_connect(const std::string& host, std::uint16_t port, int timeout_ms) {
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(timeout_ms);
  sockaddr_in addr = make_addr(host, port);
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw BridgeError("socket() failed");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
      set_nodelay(fd);
      return fd;
    }
    ::close(fd);
    if (std::chrono::steady_clock::now() >= deadline) {
      throw ConnectError("cannot connect to " + host + ":" +
                         std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

void shutdown_fd(int fd) {
  if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

void close_fd(int fd) {
  if (fd >= 0) ::close(fd);
}

bool send_all(int fd, const char* data, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t n = ::send(fd, data + off, len - off, MSG_NOSIGNAL);
    if (n > 0) {
      off += static_cast<std::size_t>(n);
    } else if (n < 0 && errno == EINTR) {
      continue;
    } else {
      return false;
    }
  }
  return true;
}

std::string frame_encode(std::string_view body) {
  std::string out;
  out.reserve(body.size() + 4);
  const std::uint32_t len = static_cast<std::uint32_t>(body.size());
  out.push_back(static_cast<char>((len >> 24) & 0xff));
  out.push_back(static_cast<char>((len >> 16) & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out.push_back(static_cast<char>(len & 0xff));
  out.append(body);
  return out;
}

bool FrameReader::poll(int fd, std::vector<std::string>& frames) {
  char chunk[65536];
  const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
  if (n <= 0) {
    if (n < 0 && errno == EINTR) return true;
    return false;
  }
  buf_.insert(buf_.end(), chunk, chunk + n);

  std::size_t pos = 0;
  while (buf_.size() - pos >= 4) {
    const auto* b = reinterpret_cast<const unsigned char*>(buf_.data() + pos);
    const std::size_t len = (std::size_t(b[0]) << 24) | (std::size_t(b[1]) << 16) |
                            (std::size_t(b[2]) << 8) | std::size_t(b[3]);
    if (len > kMaxFrame) return false;
    if (buf_.size() - pos - 4 < len) break;
    frames.emplace_back(buf_.data() + pos + 4, len);
    pos += 4 + len;
  }
  if (pos > 0) buf_.erase(buf_.begin(), buf_.begin() + pos);
  return true;
}

}  // namespace sff::bridge
