#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "clt/term.hpp"

namespace clt {

// Quantifier binders are positional like lambdas: inside the body, index 0
// of the atoms' terms (counted past any inner lambdas) is the bound variable.
class Formula {
 public:
  enum class Kind { Atom, Imp, PAnd, POr, CAnd, COr, CUni, CExi, Bang, AgentRef };

  static Formula atom(Term t);
  static Formula binary(Kind k, Formula lhs, Formula rhs, std::string prompt = {});
  static Formula imp(Formula ante, Formula cons) { return binary(Kind::Imp, std::move(ante), std::move(cons)); }
  static Formula quant(Kind k, std::string var, Formula body, std::string prompt = {});
  static Formula bang(Formula body);
  static Formula agent_ref(std::string name);

  Kind kind() const noexcept { return node_->kind; }
  bool is(Kind k) const noexcept { return kind() == k; }
  bool is_binary() const noexcept;
  bool is_quant() const noexcept { return is(Kind::CUni) || is(Kind::CExi); }
  bool is_choice() const noexcept {
    return is(Kind::CAnd) || is(Kind::COr) || is(Kind::CUni) || is(Kind::CExi);
  }

  const Term& atom_term() const { return node_->term; }
  const Formula& lhs() const { return node_->children[0]; }
  const Formula& rhs() const { return node_->children[1]; }
  const Formula& body() const { return node_->children[0]; }
  // Binder variable of CUni/CExi, or the agent name of AgentRef.
  const std::string& name() const { return node_->name; }
  // Optional environment prompt on choice operators; empty when absent.
  const std::string& prompt() const { return node_->prompt; }

 private:
  struct Node {
    Kind kind;
    Term term = Term::sym("");
    std::vector<Formula> children;
    std::string name;
    std::string prompt;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

const char* kind_name(Formula::Kind k);

bool alpha_eq(const Formula& a, const Formula& b);

// Replaces the binder variable of a quantifier body by `value`.
Formula instantiate(const Formula& body, const Term& value);

// Applies `fn` to every atom term; `depth` counts the enclosing quantifiers.
template <class Fn>
Formula map_atoms(const Formula& f, Fn&& fn, std::uint32_t depth = 0);

Formula substitute(const Formula& f, const Subst& s);

bool formula_ground(const Formula& f);

// Canonical text: minimal parentheses, reparses to an alpha-equal formula.
std::string print_formula(const Formula& f);
std::string print_formula(const Formula& f, const std::vector<std::string>& scope);

// ---------------------------------------------------------------- inline

template <class Fn>
Formula map_atoms(const Formula& f, Fn&& fn, std::uint32_t depth) {
  switch (f.kind()) {
    case Formula::Kind::Atom: return Formula::atom(fn(f.atom_term(), depth));
    case Formula::Kind::AgentRef: return f;
    case Formula::Kind::Bang: return Formula::bang(map_atoms(f.body(), fn, depth));
    case Formula::Kind::CUni:
    case Formula::Kind::CExi:
      return Formula::quant(f.kind(), f.name(), map_atoms(f.body(), fn, depth + 1), f.prompt());
    default:
      return Formula::binary(f.kind(), map_atoms(f.lhs(), fn, depth), map_atoms(f.rhs(), fn, depth),
                             f.prompt());
  }
}

}  // namespace clt
