#pragma once

// One serve connection: newline-delimited JSON records in, records out.
//
//   -> {"type":"load","program":"agent t = ..."}
//   -> {"type":"query","text":"?- t.","limits":{"max_fires":512}}
//   <- {"type":"event",...} ... {"type":"env_request","choice_id":1,...}
//   -> {"type":"env_move","choice_id":1,"pick":"left"}
//   <- {"type":"env_move",...} {"type":"event",...} ... {"type":"result",...}
//
// Apart from error records, the records sent for a query are exactly its
// trace file.

#include <optional>
#include <string>
#include <vector>

#include "clt/engine.hpp"

namespace clt::cli {

class ProtocolHandler {
 public:
  explicit ProtocolHandler(Options defaults = {}) : defaults_(std::move(defaults)) {}

  // Replies to one input line, one serialized record per element.
  std::vector<std::string> handle(const std::string& line);
  bool closed() const { return closed_; }

 private:
  std::vector<std::string> flush();
  std::vector<std::string> error(const std::string& code, const std::string& diagnostic, bool close = false);

  Options defaults_;
  std::optional<Program> program_;
  std::optional<Session> session_;
  std::size_t sent_ = 0;
  bool closed_ = false;
};

Options options_from_limits(const Json& limits, Options base);

}  // namespace clt::cli
