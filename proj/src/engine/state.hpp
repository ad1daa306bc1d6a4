#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clt/engine.hpp"

namespace clt::detail {

struct AtomInst {
  std::uint64_t id;
  Term atom;
};

// A clause installed from a resource: `f` is `@X1...@Xn. body`, where body
// is an atom, a /\-tree of atoms, or an implication with such a head.
struct Rule {
  std::uint64_t id;
  Formula f;
  bool reusable;
  bool spent = false;
};

struct Instance {
  std::vector<std::pair<std::string, Term>> metas;  // binder name, fresh meta
  std::optional<Formula> antecedent;
  std::vector<Term> consequent;
};

// A linear `A & B` resource: the machine picks one side the first time it
// needs to.
struct Group {
  std::uint64_t id;
  Formula f;
};

// A resource choice owned by the environment (`|`, `\/`, `#X.`).
struct PendingEnv {
  Formula f;
  bool reusable;
};

struct Goal {
  Formula f;
  bool query_level;  // directly inside the query, not reached through an agent
};

struct Store {
  std::vector<AtomInst> linear;
  std::vector<Term> reusable;
  std::vector<Rule> rules;
  std::vector<Group> groups;
};

// Uncommitted events form a persistent list so search states copy cheaply.
// Terms are kept unrendered: the trace prints them under the substitution
// in force when the segment commits.
struct Ev {
  Json fixed;
  std::vector<std::pair<std::string, Term>> terms;
  std::vector<std::pair<std::string, Formula>> formulas;
  std::vector<std::pair<std::string, std::vector<AtomInst>>> atoms;
  std::vector<std::pair<std::string, Term>> unifier;
  bool has_unifier = false;
};

struct EvNode {
  Ev ev;
  std::shared_ptr<const EvNode> prev;
  std::size_t length;
};

using EvList = std::shared_ptr<const EvNode>;

inline std::size_t length(const EvList& l) { return l ? l->length : 0; }
inline EvList push(const EvList& l, Ev ev) {
  return std::make_shared<const EvNode>(EvNode{std::move(ev), l, length(l) + 1});
}

struct Request {
  enum class What { GoalBranch, GoalValue, ResourceBranch, ResourceValue } what;
  Formula f;
  bool flag;  // query_level for goals, reusable for resources
};

struct State {
  Store store;
  std::vector<Goal> goals;  // back() is next
  std::vector<PendingEnv> pending_env;
  Subst subst;
  MetaGen gen;
  std::uint64_t next_atom = 1;
  std::uint64_t next_rule = 1;
  std::uint64_t next_group = 1;
  EvList events;
  std::vector<Term> outputs;
  std::vector<std::pair<std::string, Term>> bindings;
  std::size_t fires = 0;
  std::size_t depth = 0;
  std::size_t bound = 0;
  std::optional<Request> request;
};

Term resolve_in(const State& s, const Term& t);
Formula resolve_in(const State& s, const Formula& f);

// Resource polarity. Throws clt::Error for shapes that have no reading as a
// resource; `produced` collects new linear atom instances.
void load(State& s, const Program& p, const Formula& f, bool reusable, std::vector<AtomInst>& produced);

bool atom_conjunction(const Formula& f);
void collect_atoms(const Formula& f, std::vector<Term>& out);  // normalized

Instance instantiate_rule(const State& s, MetaGen& gen, const Rule& r);

// An atom as written in source, with infix built-ins.
std::string atom_text(const Term& t);
std::string snapshot(const State& s);
Json store_json(const State& s);
Json render(const Ev& ev, const Subst& subst);

bool is_builtin_atom(const Term& atom);
// nullopt when the atom is not ground enough to decide.
std::optional<bool> eval_builtin(const Term& atom);

}  // namespace clt::detail
