#pragma once

// Plays a query against agent resources. The machine side is a deterministic
// depth-first search with iterative deepening on forward firings; whenever the
// environment has to move, the search stops, everything played so far is
// committed, and an EnvRequest is handed to the caller.
//
// Each session keeps a trace: one JSON record per line of play. The same
// records make up trace files and the serve protocol.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clt/formula.hpp"
#include "clt/syntax.hpp"
#include "json.hpp"

namespace clt {

using Json = nlohmann::ordered_json;

struct Limits {
  std::size_t max_fires = 512;   // forward firings per segment between env moves
  std::size_t max_depth = 10000;  // search steps per segment
};

struct Options {
  Limits limits;
  std::size_t bang_copies = 1;  // copies played for `!` in goal position
  // Finite value domains by variable name; these take precedence over
  // `domain` declarations in the program.
  std::map<std::string, std::vector<Term>> domains;
};

enum class Status { Won, Lost, ResourceLimit };
const char* to_string(Status s);

struct EnvRequest {
  enum class Kind { Branch, Value };
  std::uint64_t choice_id = 0;
  Kind kind = Kind::Branch;
  std::vector<std::string> options;  // Branch: the two printed formulas
  std::string variable;              // Value
  std::optional<std::vector<Term>> domain;
  std::string prompt;
  std::string snapshot;
};

enum class Side { Left, Right };

struct EnvMove {
  std::uint64_t choice_id = 0;
  std::variant<Side, Term> pick;
};

struct Outcome {
  Status status = Status::Lost;
  std::vector<std::pair<std::string, Term>> bindings;
  std::vector<Term> outputs;
  Json final_store;
  std::string diagnostic;
};

// Record conversions shared by trace files and the wire protocol.
Json to_json(const EnvRequest& r);
Json to_json(const EnvMove& m);
Json to_json(const Outcome& o);
EnvMove env_move_from_json(const Json& j);
// "left" / "right" pick a branch; anything else is parsed as a ground term.
EnvMove parse_pick(std::uint64_t choice_id, const std::string& text);

class Session {
 public:
  Session(const Program& program, const Formula& query, Options options = {});
  ~Session();
  Session(const Session&);
  Session& operator=(const Session&);
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;

  // Runs machine search until the environment must move or the play ends.
  // Calling it again while a request is pending returns that request.
  std::variant<EnvRequest, Outcome> run();

  // Commits an environment move; errors: stale-choice, bad-pick,
  // non-ground-value, out-of-domain.
  void apply(const EnvMove& move);

  const std::optional<EnvRequest>& pending() const;
  const std::optional<Outcome>& outcome() const;
  const std::vector<Json>& trace() const;
  // The trace as newline-delimited text, one record per line.
  std::string trace_text() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Verdict {
  bool winnable = false;
  std::size_t plays = 0;
  std::vector<Outcome> outcomes;  // one per play, in enumeration order
};

// Enumerates every environment play; value requests need a finite domain
// (error infinite-env-domain otherwise).
Verdict verify_winnable(const Program& program, const Formula& query, const Options& options = {});

// Feeds the env moves recorded in `trace` to a fresh session and checks the
// regenerated records match; error replay-divergence names the first
// differing record index.
Outcome replay(const Program& program, const Formula& query, const std::vector<Json>& trace,
               const Options& options = {});

std::vector<Json> parse_trace(std::string_view text);

}  // namespace clt
