#pragma once

// The programs shipped under programs/, embedded at build time, and a
// direct Horn-clause prover used to cross-check the `horn` program.

#include <string>
#include <vector>

#include "clt/engine.hpp"
#include "clt/syntax.hpp"

namespace clt {

struct CanonicalQuery {
  std::string golden;  // trace file stem under golden/
  std::string query;
  std::vector<std::string> moves;  // as in move scripts: left, right, or a term
  Status expected;
};

struct BundledProgram {
  std::string name;
  std::string source;
  std::vector<CanonicalQuery> canonical;
};

const std::vector<BundledProgram>& bundled_programs();
// Errors with code unknown-name.
const BundledProgram& bundled(const std::string& name);
Program load_bundled(const std::string& name);

// Decides pv(d, g) by recursive search over the same seven rules, tried in
// the same order. Error oracle-depth past `max_depth` nested calls.
bool horn_oracle(const Term& d, const Term& g, std::size_t max_depth = 64);

}  // namespace clt
