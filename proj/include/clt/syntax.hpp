#pragma once

// Concrete syntax for `.clt` programs and queries.
//
//   agent NAME = FORMULA.          output PRED/ARITY.
//   domain VAR = {T1, ..., Tn}.    ?- FORMULA.
//
// Connectives, loosest first: `->` (right assoc), `|`, `&`, `\/`, `/\`,
// then the prefixes `!`, `@X.`, `#X.`, `prompt "..."`, and atoms. Inside
// atoms: application f(a, b), then `*`, then `+ -`, then `>=`. Lambdas are
// written `\x. body`; `%` starts a line comment. Free identifiers starting
// with an uppercase letter are clause-local: `@` binds them around the
// outermost enclosing implication, or around the atom if there is none.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clt/error.hpp"
#include "clt/formula.hpp"

namespace clt {

struct AgentDecl {
  std::string name;
  Formula body;
  SourcePos pos;
};

struct OutputDecl {
  std::string predicate;
  std::size_t arity = 0;
};

struct DomainDecl {
  std::string variable;
  std::vector<Term> values;
};

using Declaration = std::variant<AgentDecl, OutputDecl, DomainDecl>;

struct Program {
  std::vector<Declaration> declarations;
  std::vector<Formula> queries;  // `?-` lines embedded in the file

  const AgentDecl* agent(const std::string& name) const;
  std::vector<const AgentDecl*> agents() const;
  bool is_output(const std::string& predicate, std::size_t arity) const;
  const DomainDecl* domain(const std::string& variable) const;
  std::vector<std::string> agent_names() const;
};

Program parse_program(std::string_view text);

// Agent names are resolved against `program`; a leading `?-` and the final
// `.` are optional.
Formula parse_query(std::string_view text, const Program& program = {});

// A single ground term, as written in move scripts and domain lists.
Term parse_term(std::string_view text);

}  // namespace clt
