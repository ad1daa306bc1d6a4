#pragma once

// The four subcommands, written against streams so tests can drive them.
// Exit codes: 0 won (or winnable), 1 lost, 2 resource limit, 3 usage,
// parse or session errors.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clt/engine.hpp"

namespace clt::cli {

enum Exit { kWon = 0, kLost = 1, kResourceLimit = 2, kError = 3 };

struct CommonArgs {
  std::string file;
  std::optional<std::string> query;
  std::optional<std::size_t> max_fires;
  std::optional<std::size_t> max_depth;
};

struct RunArgs : CommonArgs {
  std::optional<std::string> moves;  // move script path
  std::optional<std::string> trace;  // trace output path
};

struct ReplArgs : CommonArgs {
  bool trace = false;
  std::optional<std::string> trace_file;  // trace of the latest query
};

struct VerifyArgs : CommonArgs {
  std::vector<std::string> domains;  // "Y=0,1,2,3"
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_repl(const ReplArgs& args, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

// Move script lines: `left`, `right`, a ground term, or `X = term`. Blank
// lines and `%` comments are skipped.
std::vector<std::string> read_move_script(std::istream& in);

// Program text for `file`: the file itself, else a bundled program of that
// name (with or without `.clt`).
std::string load_source(const std::string& file);

Options options_for(const CommonArgs& args);
std::string describe(const Outcome& o);
int exit_code(Status s);

}  // namespace clt::cli
