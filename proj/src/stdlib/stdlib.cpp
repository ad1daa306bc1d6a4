#include "clt/stdlib.hpp"

#include <functional>
#include <map>

namespace clt {

namespace detail {
// Generated from programs/*.clt.
extern const std::map<std::string, std::string> kBundledSources;
}  // namespace detail

const std::vector<BundledProgram>& bundled_programs() {
  static const std::vector<BundledProgram> programs = [] {
    const auto& src = detail::kBundledSources;
    std::vector<BundledProgram> out;
    out.push_back({"factorial",
                   src.at("factorial"),
                   {
                       {"factorial_y5", "?- @Y. #Z. fac(Y,Z).", {"5"}, Status::Won},
                       {"factorial_y0", "?- @Y. #Z. fac(Y,Z).", {"0"}, Status::Won},
                   }});
    out.push_back({"lottery",
                   src.at("lottery"),
                   {
                       {"lottery_left", "?- t.", {"left"}, Status::Won},
                       {"lottery_right", "?- t.", {"right"}, Status::Won},
                   }});
    out.push_back({"fastfood",
                   src.at("fastfood"),
                   {
                       {"fastfood_5_6", "?- c /\\ d.", {"5", "6"}, Status::Won},
                       {"fastfood_2_4", "?- c /\\ d.", {"2", "4"}, Status::Won},
                   }});
    out.push_back({"horn",
                   src.at("horn"),
                   {
                       {"horn_some", "?- pv(p(a), some(\\x. p(x))).", {}, Status::Won},
                       {"horn_fail", "?- pv(p(a), p(b)).", {}, Status::Lost},
                       {"horn_and", "?- pv(and(p(a), q(b)), and(q(b), p(a))).", {}, Status::Won},
                       {"horn_imp", "?- pv(and(imp(q(a), p(a)), q(a)), p(a)).", {}, Status::Won},
                       {"horn_all", "?- pv(all(\\x. imp(q(x), p(x))), p(c)).", {}, Status::Lost},
                       {"horn_all_fact", "?- pv(and(all(\\x. p(x)), q(b)), some(\\y. p(y))).", {}, Status::Won},
                   }});
    return out;
  }();
  return programs;
}

const BundledProgram& bundled(const std::string& name) {
  for (const auto& p : bundled_programs())
    if (p.name == name) return p;
  throw Error("unknown-name", "no bundled program named '" + name + "'");
}

Program load_bundled(const std::string& name) { return parse_program(bundled(name).source); }

// ---------------------------------------------------------------- oracle

namespace {

using Cont = std::function<bool(const Subst&)>;

bool has_head(const Term& t, const char* name, std::size_t arity) {
  return t.head().is(Term::Kind::Sym) && t.head().name() == name && t.args().size() == arity;
}

class HornOracle {
 public:
  HornOracle(Term program, std::size_t limit) : d_(std::move(program)), limit_(limit) {}

  bool pv(const Term& g0, const Subst& s, std::size_t depth, const Cont& k) {
    if (depth > limit_) throw Error("oracle-depth", "horn oracle exceeded depth " + std::to_string(limit_));
    Term g = resolve(g0, s);
    // 5: atoms switch to backchaining on the whole program
    if (is_atom(g) && bc(d_, g, s, depth + 1, k)) return true;
    // 6: conjunctive goals
    if (has_head(g, "and", 2)) {
      auto args = g.args();
      if (pv(args[0], s, depth + 1, [&](const Subst& s1) { return pv(args[1], s1, depth + 1, k); })) return true;
    }
    // 7: existential goals get a fresh witness
    if (has_head(g, "some", 1)) {
      Term body = normalize(Term::app(g.args()[0], gen_.fresh("X")));
      if (pv(body, s, depth + 1, k)) return true;
    }
    return false;
  }

  bool bc(const Term& dc0, const Term& a, const Subst& s, std::size_t depth, const Cont& k) {
    if (depth > limit_) throw Error("oracle-depth", "horn oracle exceeded depth " + std::to_string(limit_));
    Term dc = resolve(dc0, s);
    // 1: the clause is the atom itself
    if (auto u = unify_under(dc, resolve(a, s), s, gen_); u && k(*u.subst)) return true;
    // 2: imp(G, A) reduces A to G
    if (has_head(dc, "imp", 2)) {
      auto args = dc.args();
      if (auto u = unify_under(resolve(args[1], s), resolve(a, s), s, gen_);
          u && pv(args[0], *u.subst, depth + 1, k))
        return true;
    }
    // 3: instantiate a universal clause
    if (has_head(dc, "all", 1)) {
      Term body = normalize(Term::app(dc.args()[0], gen_.fresh("X")));
      if (bc(body, a, s, depth + 1, k)) return true;
    }
    // 4: pick either half of a conjunctive program
    if (has_head(dc, "and", 2)) {
      auto args = dc.args();
      if (bc(args[0], a, s, depth + 1, k) || bc(args[1], a, s, depth + 1, k)) return true;
    }
    return false;
  }

 private:
  static bool is_atom(const Term& g) {
    const Term& h = g.head();
    if (!h.is(Term::Kind::Sym)) return false;
    for (const char* c : {"and", "imp", "all", "some"})
      if (h.name() == c) return false;
    return true;
  }

  Term d_;
  std::size_t limit_;
  MetaGen gen_{1000000};
};

}  // namespace

bool horn_oracle(const Term& d, const Term& g, std::size_t max_depth) {
  HornOracle o(normalize(d), max_depth);
  return o.pv(normalize(g), Subst{}, 0, [](const Subst&) { return true; });
}

}  // namespace clt
