#pragma once

// TCP front end for ProtocolHandler: one thread and one session per
// connection, newline-delimited records both ways.

#include <atomic>
#include <cstdint>
#include <string>

#include "clt/engine.hpp"

namespace clt::cli {

class Server {
 public:
  // Binds 127.0.0.1:port (0 picks a free port). Error io on failure.
  explicit Server(std::uint16_t port, Options defaults = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }
  // Accepts until stop(); each connection runs detached.
  void serve();
  void stop();

 private:
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  Options defaults_;
  std::atomic<bool> stopping_{false};
};

}  // namespace clt::cli
