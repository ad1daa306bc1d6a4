#include "clt/formula.hpp"

#include <set>
#include <stdexcept>

namespace clt {

Formula Formula::atom(Term t) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->term = std::move(t);
  return Formula(std::move(n));
}

Formula Formula::binary(Kind k, Formula lhs, Formula rhs, std::string prompt) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->children = {std::move(lhs), std::move(rhs)};
  n->prompt = std::move(prompt);
  Formula f(std::move(n));
  if (!f.is_binary()) throw std::logic_error("not a binary connective");
  return f;
}

Formula Formula::quant(Kind k, std::string var, Formula body, std::string prompt) {
  if (k != Kind::CUni && k != Kind::CExi) throw std::logic_error("not a quantifier");
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->children = {std::move(body)};
  n->name = std::move(var);
  n->prompt = std::move(prompt);
  return Formula(std::move(n));
}

Formula Formula::bang(Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Bang;
  n->children = {std::move(body)};
  return Formula(std::move(n));
}

Formula Formula::agent_ref(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::AgentRef;
  n->name = std::move(name);
  return Formula(std::move(n));
}

bool Formula::is_binary() const noexcept {
  switch (kind()) {
    case Kind::Imp:
    case Kind::PAnd:
    case Kind::POr:
    case Kind::CAnd:
    case Kind::COr: return true;
    default: return false;
  }
}

const char* kind_name(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Atom: return "Atom";
    case Formula::Kind::Imp: return "Imp";
    case Formula::Kind::PAnd: return "PAnd";
    case Formula::Kind::POr: return "POr";
    case Formula::Kind::CAnd: return "CAnd";
    case Formula::Kind::COr: return "COr";
    case Formula::Kind::CUni: return "CUni";
    case Formula::Kind::CExi: return "CExi";
    case Formula::Kind::Bang: return "Bang";
    case Formula::Kind::AgentRef: return "AgentRef";
  }
  return "?";
}

bool alpha_eq(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind() || a.prompt() != b.prompt()) return false;
  switch (a.kind()) {
    case Formula::Kind::Atom: return alpha_eq(a.atom_term(), b.atom_term());
    case Formula::Kind::AgentRef: return a.name() == b.name();
    case Formula::Kind::Bang:
    case Formula::Kind::CUni:
    case Formula::Kind::CExi: return alpha_eq(a.body(), b.body());
    default: return alpha_eq(a.lhs(), b.lhs()) && alpha_eq(a.rhs(), b.rhs());
  }
}

Formula instantiate(const Formula& body, const Term& value) {
  return map_atoms(body, [&](const Term& t, std::uint32_t depth) { return instantiate(t, value, depth); });
}

Formula substitute(const Formula& f, const Subst& s) {
  if (s.empty()) return f;
  return map_atoms(f, [&](const Term& t, std::uint32_t) { return substitute(t, s); });
}

bool formula_ground(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom: return f.atom_term().ground();
    case Formula::Kind::AgentRef: return true;
    case Formula::Kind::Bang:
    case Formula::Kind::CUni:
    case Formula::Kind::CExi: return formula_ground(f.body());
    default: return formula_ground(f.lhs()) && formula_ground(f.rhs());
  }
}

// ---------------------------------------------------------------- printing

namespace {

void collect_syms(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::Sym: out.insert(t.name()); break;
    case Term::Kind::Lam: collect_syms(t.body(), out); break;
    case Term::Kind::App:
      collect_syms(t.fun(), out);
      collect_syms(t.arg(), out);
      break;
    default: break;
  }
}

void collect_syms(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom: collect_syms(f.atom_term(), out); break;
    case Formula::Kind::AgentRef: out.insert(f.name()); break;
    case Formula::Kind::Bang:
    case Formula::Kind::CUni:
    case Formula::Kind::CExi: collect_syms(f.body(), out); break;
    default:
      collect_syms(f.lhs(), out);
      collect_syms(f.rhs(), out);
  }
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Levels, loosest first: 1 ->, 2 |, 3 &, 4 \/, 5 /\, 6 prefixes, 7 atoms.
int level_of(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Imp: return 1;
    case Formula::Kind::COr: return 2;
    case Formula::Kind::CAnd: return 3;
    case Formula::Kind::POr: return 4;
    case Formula::Kind::PAnd: return 5;
    case Formula::Kind::Bang:
    case Formula::Kind::CUni:
    case Formula::Kind::CExi: return 6;
    default: return 7;
  }
}

const char* op_text(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Imp: return "->";
    case Formula::Kind::COr: return "|";
    case Formula::Kind::CAnd: return "&";
    case Formula::Kind::POr: return "\\/";
    case Formula::Kind::PAnd: return "/\\";
    default: return "?";
  }
}

std::string term_in_scope(const Term& t, const std::vector<std::string>& scope) { return to_string(t, scope); }

class FormulaPrinter {
 public:
  explicit FormulaPrinter(std::vector<std::string> scope) : scope_(std::move(scope)) {}

  std::string print(const Formula& f, int min_level) {
    int level = f.prompt().empty() ? level_of(f.kind()) : 6;
    std::string s = f.prompt().empty() ? bare(f) : "prompt " + quote(f.prompt()) + " " + bare_prefixed(f);
    return level < min_level ? "(" + s + ")" : s;
  }

 private:
  std::string bare_prefixed(const Formula& f) {
    std::string s = bare(f);
    return level_of(f.kind()) < 6 ? "(" + s + ")" : s;
  }

  std::string bare(const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Atom: return atom(f.atom_term());
      case Formula::Kind::AgentRef: return f.name();
      case Formula::Kind::Bang: return "!" + print(f.body(), 6);
      case Formula::Kind::CUni:
      case Formula::Kind::CExi: {
        std::set<std::string> syms;
        collect_syms(f.body(), syms);
        std::string name = fresh_name(f.name().empty() ? "X" : f.name(), syms);
        scope_.push_back(name);
        std::string s = std::string(f.is(Formula::Kind::CUni) ? "@" : "#") + name + ". " + print(f.body(), 6);
        scope_.pop_back();
        return s;
      }
      default: break;
    }
    int level = level_of(f.kind());
    bool right_assoc = f.is(Formula::Kind::Imp);
    std::string l = print(f.lhs(), right_assoc ? level + 1 : level);
    std::string r = print(f.rhs(), right_assoc ? level : level + 1);
    return l + " " + op_text(f.kind()) + " " + r;
  }

  std::string atom(const Term& t) {
    const Term& h = t.head();
    auto args = t.args();
    if (h.is(Term::Kind::Sym) && h.name() == ">=" && args.size() == 2) {
      // Operands print at additive level; lambdas get parenthesized there.
      std::string a = term_in_scope(args[0], scope_);
      std::string b = term_in_scope(args[1], scope_);
      if (args[0].is(Term::Kind::Lam)) a = "(" + a + ")";
      if (args[1].is(Term::Kind::Lam)) b = "(" + b + ")";
      return a + " >= " + b;
    }
    return term_in_scope(t, scope_);
  }

  std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
    auto taken = [&](const std::string& n) {
      if (avoid.count(n)) return true;
      for (const auto& s : scope_)
        if (s == n) return true;
      return false;
    };
    if (!taken(base)) return base;
    for (int i = 1;; ++i) {
      std::string n = base + std::to_string(i);
      if (!taken(n)) return n;
    }
  }

  std::vector<std::string> scope_;
};

}  // namespace

std::string print_formula(const Formula& f) { return FormulaPrinter({}).print(f, 0); }

std::string print_formula(const Formula& f, const std::vector<std::string>& scope) {
  return FormulaPrinter(scope).print(f, 0);
}

}  // namespace clt
