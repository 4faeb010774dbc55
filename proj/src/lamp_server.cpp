#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "pathlight/lampnet.hpp"

namespace pathlight {

namespace {

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

sockaddr_in resolve(const LampAddress& addr) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(addr.port);
  if (::inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) == 1) return sa;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(addr.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw std::runtime_error("cannot resolve " + addr.host);
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return sa;
}

constexpr std::size_t kMaxLine = 4096;

}  // namespace

LampServer::LampServer(const LampAddress& bind) {
  sockaddr_in sa;
  try {
    sa = resolve(bind);
  } catch (const std::exception& e) {
    throw BindFailure(e.what());
  }
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BindFailure(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0 || ::listen(listen_fd_, 16) < 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw BindFailure("cannot bind " + bind.host + ":" + std::to_string(bind.port) + ": " + err);
  }
  socklen_t len = sizeof sa;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
  port_ = ntohs(sa.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

LampServer::~LampServer() { stop(); }

void LampServer::stop() {
  if (stopping_.exchange(true)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (std::thread& t : workers) t.join();
  ::close(listen_fd_);
}

void LampServer::wait() {
  while (!stopping_.load()) ::usleep(50 * 1000);
  stop();
}

void LampServer::accept_loop() {
  while (!stopping_.load()) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, 50);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(mutex_);
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void LampServer::serve_connection(int fd) {
  std::string pending;
  char buf[1024];
  bool open = true;
  while (open) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = pending.find('\n')) != std::string::npos) {
      const std::string line = pending.substr(0, nl + 1);
      pending.erase(0, nl + 1);
      std::string reply;
      {
        std::lock_guard lock(mutex_);
        reply = handle_request(line, state_, &journal_);
      }
      if (!write_all(fd, reply)) {
        open = false;
        break;
      }
    }
    if (pending.size() > kMaxLine) {
      write_all(fd, "ERR parse\n");
      pending.clear();
    }
  }
  std::lock_guard lock(mutex_);
  ::close(fd);
  std::erase(client_fds_, fd);
}

std::vector<LightingCommand> LampServer::journal() const {
  std::lock_guard lock(mutex_);
  return journal_;
}

std::string LampServer::describe(const std::string& zone) const {
  std::lock_guard lock(mutex_);
  return state_.describe(zone);
}

LampClient::LampClient(const LampAddress& addr) {
  const sockaddr_in sa = resolve(addr);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) < 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw std::runtime_error("cannot connect to " + addr.host + ":" + std::to_string(addr.port) + ": " + err);
  }
}

LampClient::~LampClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string LampClient::request(std::string_view line) {
  std::string out(line);
  if (out.empty() || out.back() != '\n') out.push_back('\n');
  if (!write_all(fd_, out)) throw std::runtime_error("lamp connection closed");
  std::size_t nl;
  char buf[512];
  while ((nl = buffer_.find('\n')) == std::string::npos) {
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw std::runtime_error("lamp connection closed");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
  std::string reply = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  return reply;
}

void LampClient::send(const LightingCommand& cmd) {
  const std::string reply = request(encode(cmd));
  if (reply != "OK") throw std::runtime_error("lamp rejected " + encode(cmd).substr(0, encode(cmd).size() - 1) + ": " + reply);
}

}  // namespace pathlight
