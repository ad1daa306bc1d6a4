#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "clt/stdlib.hpp"

namespace clt::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot write " + path);
  f << text;
}

const char* status_word(Status s) {
  switch (s) {
    case Status::Won: return "Won";
    case Status::Lost: return "Lost";
    case Status::ResourceLimit: return "ResourceLimit";
  }
  return "?";
}

// The one query to play: --query, else the first `?-` in the file.
Formula pick_query(const CommonArgs& args, const Program& prog) {
  if (args.query) return parse_query(*args.query, prog);
  if (prog.queries.empty()) throw Error("usage", "no --query given and the program has no `?-` line");
  return prog.queries.front();
}

// `X = 5` names the variable it answers; check it against the request.
std::string move_text(const std::string& line, const EnvRequest& req, std::size_t index) {
  static const std::regex named(R"(^([A-Z][A-Za-z0-9_]*)\s*=\s*(.+)$)");
  std::smatch m;
  if (std::regex_match(line, m, named)) {
    if (req.kind != EnvRequest::Kind::Value || m[1] != req.variable)
      throw Error("bad-pick", "move " + std::to_string(index + 1) + " answers " + m[1].str() + " but request " +
                                  std::to_string(req.choice_id) + " asks for " +
                                  (req.kind == EnvRequest::Kind::Value ? req.variable : "left or right"));
    return trim(m[2]);
  }
  return line;
}

std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

void print_request(const EnvRequest& req, std::ostream& out) {
  out << req.prompt << "\n";
  if (req.kind == EnvRequest::Kind::Branch) {
    out << "  left:  " << req.options[0] << "\n  right: " << req.options[1] << "\n";
  } else if (req.domain) {
    std::string d;
    for (const auto& t : *req.domain) d += (d.empty() ? "" : ", ") + to_string(t);
    out << "  " << req.variable << " in {" << d << "}\n";
  }
}

}  // namespace

int exit_code(Status s) {
  switch (s) {
    case Status::Won: return kWon;
    case Status::Lost: return kLost;
    case Status::ResourceLimit: return kResourceLimit;
  }
  return kError;
}

std::string describe(const Outcome& o) {
  std::string s = status_word(o.status);
  std::string b;
  for (const auto& [name, t] : o.bindings) b += (b.empty() ? "" : ", ") + name + " = " + to_string(t);
  if (!b.empty()) s += "  " + b;
  s += "\n";
  if (!o.outputs.empty()) {
    std::string outs;
    for (const auto& t : o.outputs) outs += (outs.empty() ? "" : ", ") + to_string(t);
    s += "outputs: " + outs + "\n";
  }
  if (!o.diagnostic.empty()) s += "diagnostic: " + o.diagnostic + "\n";
  return s;
}

std::vector<std::string> read_move_script(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto c = line.find('%'); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string load_source(const std::string& file) {
  namespace fs = std::filesystem;
  if (fs::exists(file)) {
    std::ifstream f(file, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  std::string stem = fs::path(file).filename().string();
  if (stem.size() > 4 && stem.ends_with(".clt")) stem.resize(stem.size() - 4);
  for (const auto& p : bundled_programs())
    if (p.name == stem) return p.source;
  throw Error("io", "cannot read " + file);
}

Options options_for(const CommonArgs& args) {
  Options o;
  if (const char* env = std::getenv("CLT_MAX_FIRES")) {
    try {
      o.limits.max_fires = std::stoul(env);
    } catch (const std::exception&) {
      throw Error("usage", std::string("CLT_MAX_FIRES is not a number: ") + env);
    }
  }
  if (args.max_fires) o.limits.max_fires = *args.max_fires;
  if (args.max_depth) o.limits.max_depth = *args.max_depth;
  return o;
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  std::optional<Session> session;
  auto save_trace = [&] {
    if (args.trace && session) write_file(*args.trace, session->trace_text());
  };
  try {
    Program prog = parse_program(load_source(args.file));
    Formula query = pick_query(args, prog);
    std::vector<std::string> moves;
    if (args.moves) {
      std::ifstream f(*args.moves);
      if (!f) throw Error("io", "cannot read " + *args.moves);
      moves = read_move_script(f);
    }
    session.emplace(prog, query, options_for(args));
    std::size_t next = 0;
    while (true) {
      auto r = session->run();
      if (auto* req = std::get_if<EnvRequest>(&r)) {
        if (next >= moves.size()) {
          save_trace();
          err << "error: unanswered environment request " << req->choice_id << ": " << req->prompt << "\n";
          return kError;
        }
        session->apply(parse_pick(req->choice_id, move_text(moves[next], *req, next)));
        ++next;
        continue;
      }
      const Outcome& o = std::get<Outcome>(r);
      save_trace();
      if (next < moves.size()) {
        err << "error: " << moves.size() - next << " surplus move(s) after the play ended\n";
        return kError;
      }
      out << describe(o);
      return exit_code(o.status);
    }
  } catch (const Error& e) {
    try {
      save_trace();
    } catch (const Error&) {
    }
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kError;
  }
}

int cmd_repl(const ReplArgs& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Program prog;
  Options options;
  try {
    prog = parse_program(load_source(args.file));
    options = options_for(args);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kError;
  }
  std::string line;
  while (true) {
    out << "?- " << std::flush;
    if (!std::getline(in, line)) return kWon;
    line = trim(line);
    if (line == ":quit") return kWon;
    if (line.empty()) continue;
    std::optional<Session> session;
    std::size_t shown = 0;
    auto show_events = [&] {
      const auto& t = session->trace();
      for (; shown < t.size(); ++shown)
        if (args.trace && t[shown].value("type", "") == "event") out << "  " << t[shown].dump() << "\n";
    };
    try {
      session.emplace(prog, parse_query(line, prog), options);
      while (true) {
        auto r = session->run();
        show_events();
        if (auto* o = std::get_if<Outcome>(&r)) {
          out << describe(*o);
          break;
        }
        const auto& req = std::get<EnvRequest>(r);
        print_request(req, out);
        while (true) {
          out << (req.kind == EnvRequest::Kind::Branch ? "left/right> " : "value> ") << std::flush;
          std::string pick;
          if (!std::getline(in, pick)) return kWon;
          pick = trim(pick);
          if (pick == ":quit") return kWon;
          if (pick.empty()) continue;
          if (req.kind == EnvRequest::Kind::Branch) {
            if (pick == req.options[0]) pick = "left";
            if (pick == req.options[1]) pick = "right";
          }
          try {
            session->apply(parse_pick(req.choice_id, move_text(pick, req, 0)));
            break;
          } catch (const Error& e) {
            out << "invalid: " << e.what() << "\n";
          }
        }
      }
      if (args.trace_file) write_file(*args.trace_file, session->trace_text());
    } catch (const Error& e) {
      out << "error: " << e.code() << ": " << e.what() << "\n";
    }
  }
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  try {
    Program prog = parse_program(load_source(args.file));
    Formula query = pick_query(args, prog);
    Options options = options_for(args);
    for (const auto& d : args.domains) {
      auto eq = d.find('=');
      if (eq == std::string::npos) throw Error("usage", "--domain expects VAR=v1,v2,...: " + d);
      std::vector<Term> values;
      for (const auto& v : split_top_level(d.substr(eq + 1))) values.push_back(parse_term(v));
      options.domains[trim(d.substr(0, eq))] = values;
    }
    Verdict v = verify_winnable(prog, query, options);
    out << "winnable: " << (v.winnable ? "true" : "false") << " (" << v.plays << " play" << (v.plays == 1 ? "" : "s")
        << ")\n";
    return v.winnable ? kWon : kLost;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kError;
  }
}

}  // namespace clt::cli
