#include <set>

#include "clt/term.hpp"

namespace clt {

std::string meta_name(MetaId id, const std::string& hint) { return "_" + hint + std::to_string(id); }

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

bool is_operator_symbol(const std::string& n) { return is_arith_symbol(n) || n == ">="; }

class TermPrinter {
 public:
  explicit TermPrinter(std::vector<std::string> scope) : scope_(std::move(scope)) {}

  // Levels: 0 lambda, 1 additive, 2 multiplicative, 3 application/primary.
  std::string print(const Term& t, int level) {
    switch (t.kind()) {
      case Term::Kind::Var: {
        auto i = t.var_index();
        if (i < scope_.size()) return scope_[scope_.size() - 1 - i];
        return "_v" + std::to_string(i);
      }
      case Term::Kind::Sym:
        return is_operator_symbol(t.name()) ? "(" + t.name() + ")" : t.name();
      case Term::Kind::Int: return t.int_value().str();
      case Term::Kind::Meta: return meta_name(t.meta_id(), t.name());
      case Term::Kind::Lam: {
        std::set<std::string> syms;
        collect_syms(t.body(), syms);
        std::string name = fresh_name(t.name().empty() ? "x" : t.name(), syms);
        scope_.push_back(name);
        std::string s = "\\" + name + ". " + print(t.body(), 0);
        scope_.pop_back();
        return level > 0 ? "(" + s + ")" : s;
      }
      case Term::Kind::App: break;
    }

    const Term& h = t.head();
    auto args = t.args();
    if (h.is(Term::Kind::Sym) && is_arith_symbol(h.name()) && args.size() == 2) {
      int op_level = h.name() == "*" ? 2 : 1;
      std::string s = print(args[0], op_level) + " " + h.name() + " " + print(args[1], op_level + 1);
      return level > op_level ? "(" + s + ")" : s;
    }
    std::string head;
    if (h.is(Term::Kind::Sym) || h.is(Term::Kind::Var) || h.is(Term::Kind::Meta))
      head = print(h, 3);
    else
      head = "(" + print(h, 0) + ")";
    std::string s = head + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) s += ", ";
      s += print(args[i], 0);
    }
    return s + ")";
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

 private:
  std::vector<std::string> scope_;
};

}  // namespace

std::string to_string(const Term& t) { return TermPrinter({}).print(t, 0); }

std::string to_string(const Term& t, const std::vector<std::string>& scope) {
  return TermPrinter(scope).print(t, 0);
}

}  // namespace clt
