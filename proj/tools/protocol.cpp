#include "protocol.hpp"

namespace clt::cli {

Options options_from_limits(const Json& limits, Options base) {
  if (!limits.is_object()) return base;
  if (auto it = limits.find("max_fires"); it != limits.end() && it->is_number_unsigned())
    base.limits.max_fires = it->get<std::size_t>();
  if (auto it = limits.find("max_depth"); it != limits.end() && it->is_number_unsigned())
    base.limits.max_depth = it->get<std::size_t>();
  return base;
}

std::vector<std::string> ProtocolHandler::error(const std::string& code, const std::string& diagnostic, bool close) {
  if (close) closed_ = true;
  return {Json{{"type", "error"}, {"code", code}, {"diagnostic", diagnostic}}.dump()};
}

std::vector<std::string> ProtocolHandler::flush() {
  std::vector<std::string> out;
  const auto& trace = session_->trace();
  for (; sent_ < trace.size(); ++sent_) out.push_back(trace[sent_].dump());
  return out;
}

std::vector<std::string> ProtocolHandler::handle(const std::string& line) {
  if (closed_) return {};
  Json msg;
  try {
    msg = Json::parse(line);
  } catch (const Json::parse_error&) {
    return error("malformed", "not a JSON record", true);
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
    return error("malformed", "record without a type", true);
  const std::string type = msg["type"];

  if (type == "load") {
    if (!msg.contains("program") || !msg["program"].is_string())
      return error("malformed", "load needs a program string", true);
    try {
      program_ = parse_program(msg["program"].get<std::string>());
    } catch (const ParseError& e) {
      program_.reset();
      Json j{{"type", "error"}, {"code", "parse"}, {"diagnostic", e.what()}, {"line", e.pos().line},
             {"column", e.pos().column}};
      return {j.dump()};
    }
    session_.reset();
    return {};
  }

  if (type == "query") {
    if (!msg.contains("text") || !msg["text"].is_string()) return error("malformed", "query needs a text string", true);
    Program empty;
    const Program& prog = program_ ? *program_ : empty;
    try {
      Formula q = parse_query(msg["text"].get<std::string>(), prog);
      session_.emplace(prog, q, options_from_limits(msg.value("limits", Json::object()), defaults_));
      sent_ = 0;
      session_->run();
    } catch (const ParseError& e) {
      Json j{{"type", "error"}, {"code", "parse"}, {"diagnostic", e.what()}, {"line", e.pos().line},
             {"column", e.pos().column}};
      return {j.dump()};
    } catch (const Error& e) {
      auto out = session_ ? flush() : std::vector<std::string>{};
      out.push_back(Json{{"type", "result"}, {"status", "error"}, {"code", e.code()}, {"diagnostic", e.what()}}.dump());
      session_.reset();
      return out;
    }
    return flush();
  }

  if (type == "env_move") {
    if (!session_) return error("no-session", "env_move before a query");
    EnvMove move;
    try {
      move = env_move_from_json(msg);
    } catch (const ParseError& e) {
      return error("non-ground-value", e.what());
    } catch (const Error& e) {
      return error(e.code(), e.what(), e.code() == "malformed");
    }
    try {
      session_->apply(move);
      session_->run();
    } catch (const Error& e) {
      if (e.code() == "stale-choice" || e.code() == "bad-pick" || e.code() == "non-ground-value" ||
          e.code() == "out-of-domain")
        return error(e.code(), e.what());
      auto out = flush();
      out.push_back(Json{{"type", "result"}, {"status", "error"}, {"code", e.code()}, {"diagnostic", e.what()}}.dump());
      session_.reset();
      return out;
    }
    return flush();
  }

  return error("malformed", "unknown record type '" + type + "'", true);
}

}  // namespace clt::cli
