#pragma once

// Untyped lambda terms with positional (de Bruijn) bound variables,
// metavariables, exact integers, and higher-order pattern unification.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace clt {

using BigInt = boost::multiprecision::cpp_int;
using MetaId = std::uint64_t;

class Term {
 public:
  enum class Kind { Var, Sym, Int, Lam, App, Meta };

  static Term var(std::uint32_t index, std::string hint = {});
  static Term sym(std::string name);
  static Term integer(BigInt value);
  static Term lam(std::string hint, Term body);
  static Term app(Term fun, Term arg);
  static Term app(Term head, const std::vector<Term>& args);
  static Term meta(MetaId id, std::string hint = {});

  Kind kind() const noexcept;
  bool is(Kind k) const noexcept { return kind() == k; }

  // Accessors; calling the wrong one is a programming error (std::get throws).
  // Bound variables are positional: index 0 is the innermost binder. Names
  // on Var/Lam/Meta are hints for printing only.
  std::uint32_t var_index() const;
  const std::string& name() const;  // Sym name, or the hint of Var/Lam/Meta
  const BigInt& int_value() const;
  const Term& body() const;
  const Term& fun() const;
  const Term& arg() const;
  MetaId meta_id() const;

  // Spine view: head applied to args, left to right.
  const Term& head() const;
  std::vector<Term> args() const;

  bool ground() const;  // no metavariables
  bool closed() const;  // no dangling bound-variable references
  bool contains_meta(MetaId id) const;

  const void* identity() const noexcept { return node_.get(); }

  struct Node;

 private:
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

// Structural equality modulo bound-variable names.
bool alpha_eq(const Term& a, const Term& b);

// Adds `by` to every bound-variable reference at or above `cutoff`.
Term shift(const Term& t, int by, std::uint32_t cutoff = 0);

// Replaces index 0 of an abstraction body by `value`, lowering the others.
Term instantiate(const Term& body, const Term& value);

// Same, for a binder sitting `depth` levels outside `t`.
Term instantiate(const Term& t, const Term& value, std::uint32_t depth);

// Instantiates `count` nested binders at once; values[0] replaces the
// innermost (index 0).
Term instantiate_all(const Term& body, const std::vector<Term>& values);

inline constexpr std::size_t kDefaultReductionLimit = 100000;

// beta-normal form; ground integer applications of + - * are evaluated.
// Throws Error("reduction-limit") past the step ceiling.
Term normalize(const Term& t, std::size_t max_steps = kDefaultReductionLimit);

bool is_arith_symbol(const std::string& name);
bool is_builtin_symbol(const std::string& name);

class Subst {
 public:
  Subst() = default;

  bool empty() const noexcept { return bindings_.empty(); }
  std::size_t size() const noexcept { return bindings_.size(); }
  const std::map<MetaId, Term>& bindings() const noexcept { return bindings_; }
  const Term* lookup(MetaId id) const;

  // Adds id := value keeping the map idempotent: `value` is first resolved
  // against the current bindings, existing values are rewritten.
  void bind(MetaId id, const Term& value);

  // this ∘ later: the result applies `this`, then `later`.
  void compose(const Subst& later);

 private:
  std::map<MetaId, Term> bindings_;
};

// Capture-avoiding metavariable replacement. Does not normalize.
Term substitute(const Term& t, const Subst& s);

// Normalizes after substitution.
Term resolve(const Term& t, const Subst& s);

class MetaGen {
 public:
  explicit MetaGen(MetaId next = 1) : next_(next) {}
  Term fresh(std::string hint = {}) { return Term::meta(next_++, std::move(hint)); }
  MetaId peek() const noexcept { return next_; }

 private:
  MetaId next_;
};

enum class UnifyErrorKind { Clash, Occurs, NonPattern };

struct UnifyError {
  UnifyErrorKind kind;
  std::string detail;
};

const char* to_string(UnifyErrorKind k);

struct UnifyResult {
  std::optional<Subst> subst;
  UnifyError error{UnifyErrorKind::Clash, {}};

  explicit operator bool() const noexcept { return subst.has_value(); }
};

// Most general unifier in the Miller pattern fragment. Inputs are expected
// in normal form; fresh metavariables (pruning, flex-flex) come from `gen`.
UnifyResult unify(const Term& a, const Term& b, MetaGen& gen);

// Same, starting from existing bindings that are extended in place on success.
UnifyResult unify_under(const Term& a, const Term& b, const Subst& base, MetaGen& gen);

// Printing. Bound names are kept from hints, renamed only when they would
// capture. Binary + - * print infix, other applications as f(a, b).
std::string to_string(const Term& t);
std::string to_string(const Term& t, const std::vector<std::string>& scope);
std::string meta_name(MetaId id, const std::string& hint);

}  // namespace clt
