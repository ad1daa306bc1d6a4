#pragma once

#include "state.hpp"

namespace clt::detail {

struct SegmentResult {
  // Set when the segment reached an environment request or an empty goal
  // stack; its event list is the committed line of play.
  std::optional<State> state;
  Status status = Status::Lost;
  bool non_pattern = false;
  std::string detail;
};

// Runs one segment: from `start` (just after the last env move) up to the
// next request or the end of play, deepening the forward-fire bound one
// step at a time.
SegmentResult run_segment(const Program& program, const Options& options, const State& start,
                          std::size_t trace_base);

Ev event(const char* name);

}  // namespace clt::detail
