#include <gmpxx.h>

#include <functional>
#include <map>
#include <set>

#include "clt/error.hpp"
#include "clt/term.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace clt;
using clt::testing::Gen;

namespace {

Term S(const char* n) { return Term::sym(n); }
Term I(long v) { return Term::integer(v); }
Term A(Term h, std::vector<Term> args) { return Term::app(std::move(h), args); }
Term V(std::uint32_t i) { return Term::var(i, "x"); }

bool sound(const Term& a, const Term& b, const Subst& s) {
  return alpha_eq(normalize(substitute(a, s)), normalize(substitute(b, s)));
}

// --- named-variable oracle for capture-avoiding substitution

struct Named {
  enum K { Var, Sym, Lam, App, Meta } k;
  std::string name;
  std::vector<Named> kids;
};

std::set<std::string> free_vars(const Named& t) {
  switch (t.k) {
    case Named::Var: return {t.name};
    case Named::Lam: {
      auto fv = free_vars(t.kids[0]);
      fv.erase(t.name);
      return fv;
    }
    case Named::App: {
      auto fv = free_vars(t.kids[0]);
      auto rhs = free_vars(t.kids[1]);
      fv.insert(rhs.begin(), rhs.end());
      return fv;
    }
    default: return {};
  }
}

Named rename(const Named& t, const std::string& from, const std::string& to) {
  switch (t.k) {
    case Named::Var: return t.name == from ? Named{Named::Var, to, {}} : t;
    case Named::Lam:
      if (t.name == from) return t;
      return Named{Named::Lam, t.name, {rename(t.kids[0], from, to)}};
    case Named::App: return Named{Named::App, "", {rename(t.kids[0], from, to), rename(t.kids[1], from, to)}};
    default: return t;
  }
}

int fresh_counter = 0;

Named named_subst(const Named& t, const std::string& meta, const Named& value) {
  switch (t.k) {
    case Named::Meta: return t.name == meta ? value : t;
    case Named::Lam: {
      auto fv = free_vars(value);
      if (fv.count(t.name)) {
        std::string fresh = "r" + std::to_string(fresh_counter++);
        Named body = rename(t.kids[0], t.name, fresh);
        return Named{Named::Lam, fresh, {named_subst(body, meta, value)}};
      }
      return Named{Named::Lam, t.name, {named_subst(t.kids[0], meta, value)}};
    }
    case Named::App:
      return Named{Named::App, "", {named_subst(t.kids[0], meta, value), named_subst(t.kids[1], meta, value)}};
    default: return t;
  }
}

Term to_debruijn(const Named& t, std::vector<std::string>& ctx) {
  switch (t.k) {
    case Named::Var:
      for (std::size_t i = ctx.size(); i-- > 0;)
        if (ctx[i] == t.name) return Term::var(static_cast<std::uint32_t>(ctx.size() - 1 - i), t.name);
      throw std::logic_error("unbound " + t.name);
    case Named::Sym: return Term::sym(t.name);
    case Named::Meta: return Term::meta(static_cast<MetaId>(std::stoul(t.name.substr(1))), "M");
    case Named::Lam: {
      ctx.push_back(t.name);
      Term b = to_debruijn(t.kids[0], ctx);
      ctx.pop_back();
      return Term::lam(t.name, b);
    }
    case Named::App: return Term::app(to_debruijn(t.kids[0], ctx), to_debruijn(t.kids[1], ctx));
  }
  throw std::logic_error("bad");
}

Named random_named(Gen& g, int size, std::vector<std::string>& scope, bool with_meta) {
  int c = size <= 0 ? g.below(3) : g.below(6);
  switch (c) {
    case 0: return Named{Named::Var, g.pick(scope), {}};
    case 1:
      if (with_meta) return Named{Named::Meta, "M1", {}};
      return Named{Named::Sym, "q", {}};
    case 2: return Named{Named::Sym, g.pick(std::vector<std::string>{"q", "s"}), {}};
    case 3: {
      std::string n = g.pick(std::vector<std::string>{"x", "y", "z", "y0"});
      scope.push_back(n);
      Named body = random_named(g, size - 1, scope, with_meta);
      scope.pop_back();
      return Named{Named::Lam, n, {body}};
    }
    default: {
      Named f = random_named(g, size / 2, scope, with_meta);
      if (f.k == Named::Lam) f = Named{Named::Sym, "q", {}};  // keep values redex-free
      return Named{Named::App, "", {f, random_named(g, size / 2, scope, with_meta)}};
    }
  }
}

std::string eval_oracle(const Term& t) {
  std::function<mpz_class(const Term&)> ev = [&](const Term& x) -> mpz_class {
    if (x.is(Term::Kind::Int)) return mpz_class(x.int_value().str());
    auto args = x.args();
    const auto& op = x.head().name();
    mpz_class a = ev(args[0]), b = ev(args[1]);
    if (op == "+") return a + b;
    if (op == "-") return a - b;
    return a * b;
  };
  return ev(t).get_str();
}

Term random_arith(Gen& g, int depth) {
  if (depth == 0 || g.chance(0.25)) return Term::integer(g.integer());
  const char* ops[] = {"+", "-", "*"};
  return A(S(ops[g.below(3)]), {random_arith(g, depth - 1), random_arith(g, depth - 1)});
}

}  // namespace

TEST_SUITE("term") {
  TEST_CASE("normalize examples") {
    // (\x. p(x)) a  ->  p(a)
    Term redex = Term::app(Term::lam("x", A(S("p"), {V(0)})), S("a"));
    CHECK(alpha_eq(normalize(redex), A(S("p"), {S("a")})));
    CHECK(alpha_eq(normalize(S("c")), S("c")));
    CHECK(alpha_eq(normalize(A(S("+"), {I(3), A(S("*"), {I(4), I(2)})})), I(11)));
    Term inert = A(S("*"), {Term::meta(1, "X"), Term::meta(2, "Y")});
    CHECK(alpha_eq(normalize(inert), inert));
    // arithmetic under a metavariable argument stays put, ground parts fold
    Term partial = A(S("+"), {Term::meta(1, "X"), A(S("-"), {I(7), I(9)})});
    CHECK(alpha_eq(normalize(partial), A(S("+"), {Term::meta(1, "X"), I(-2)})));
  }

  TEST_CASE("normalize reports the reduction ceiling") {
    Term omega_half = Term::lam("x", Term::app(V(0), V(0)));
    Term omega = Term::app(omega_half, omega_half);
    try {
      normalize(omega, 500);
      FAIL("expected reduction-limit");
    } catch (const Error& e) {
      CHECK(e.code() == "reduction-limit");
    }
  }

  TEST_CASE("alpha equality ignores binder names") {
    CHECK(alpha_eq(Term::lam("x", A(S("p"), {Term::var(0, "x")})), Term::lam("y", A(S("p"), {Term::var(0, "y")}))));
    CHECK_FALSE(alpha_eq(A(S("p"), {S("a")}), A(S("p"), {S("b")})));
    Term id_applied = Term::app(Term::lam("x", V(0)), Term::lam("y", A(S("p"), {V(0)})));
    CHECK(alpha_eq(normalize(id_applied), Term::lam("z", A(S("p"), {V(0)}))));
  }

  TEST_CASE("substitute examples") {
    // pv(D, G(X)) with G := \x. p(x)
    Term g = Term::meta(1, "G"), x = Term::meta(2, "X"), d = Term::meta(3, "D");
    Term t = A(S("pv"), {d, Term::app(g, x)});
    Subst s;
    s.bind(1, Term::lam("x", A(S("p"), {V(0)})));
    Term out = substitute(t, s);
    CHECK(alpha_eq(out, A(S("pv"), {d, Term::app(Term::lam("x", A(S("p"), {V(0)})), x)})));
    CHECK(alpha_eq(substitute(t, Subst{}), t));
    CHECK(alpha_eq(normalize(out), A(S("pv"), {d, A(S("p"), {x})})));
  }

  TEST_CASE("substitute is capture-avoiding against a named oracle") {
    Gen g(7);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
      std::vector<std::string> outer{"y0", "y1"};
      Named t = random_named(g, 6, outer, true);
      Named v = random_named(g, 4, outer, false);
      Named expected = named_subst(t, "M1", v);
      std::vector<std::string> ctx{"y0", "y1"};
      Term dt = to_debruijn(t, ctx);
      Term dv = to_debruijn(v, ctx);
      Term de = to_debruijn(expected, ctx);
      Subst s;
      s.bind(1, dv);
      CHECK(alpha_eq(substitute(dt, s), de));
      ++checked;
    }
    CHECK(checked == 100);
  }

  TEST_CASE("subst stays idempotent") {
    Subst s;
    s.bind(1, A(S("f"), {Term::meta(2, "Y")}));
    s.bind(2, S("a"));
    Term t = A(S("g"), {Term::meta(1, "X"), Term::meta(2, "Y")});
    CHECK(alpha_eq(substitute(substitute(t, s), s), substitute(t, s)));
    CHECK(alpha_eq(*s.lookup(1), A(S("f"), {S("a")})));
  }

  TEST_CASE("unify examples") {
    MetaGen gen(100);
    Term x = Term::meta(1, "X");
    auto r = unify(A(S("p"), {x}), A(S("p"), {S("a")}), gen);
    REQUIRE(r);
    CHECK(alpha_eq(*r.subst->lookup(1), S("a")));

    Term ground = A(S("f"), {S("a"), I(3)});
    auto same = unify(ground, ground, gen);
    REQUIRE(same);
    CHECK(same.subst->empty());

    Term gm = Term::meta(2, "G");
    Term lhs = Term::lam("x", Term::app(gm, V(0)));
    Term rhs = Term::lam("x", A(S("p"), {V(0)}));
    auto ho = unify(lhs, rhs, gen);
    REQUIRE(ho);
    CHECK(alpha_eq(*ho.subst->lookup(2), Term::lam("y", A(S("p"), {V(0)}))));
    CHECK(sound(lhs, rhs, *ho.subst));

    auto occurs = unify(x, A(S("f"), {x}), gen);
    REQUIRE_FALSE(occurs);
    CHECK(occurs.error.kind == UnifyErrorKind::Occurs);

    auto clash = unify(A(S("p"), {S("a")}), A(S("q"), {S("a")}), gen);
    REQUIRE_FALSE(clash);
    CHECK(clash.error.kind == UnifyErrorKind::Clash);

    // Meta applied to a constant, and to a repeated variable.
    auto np = unify(Term::app(gm, S("a")), S("b"), gen);
    REQUIRE_FALSE(np);
    CHECK(np.error.kind == UnifyErrorKind::NonPattern);
    auto rep = unify(Term::lam("x", A(gm, {V(0), V(0)})), Term::lam("x", S("b")), gen);
    REQUIRE_FALSE(rep);
    CHECK(rep.error.kind == UnifyErrorKind::NonPattern);
  }

  TEST_CASE("unify pattern cases: scope escape, pruning, flex-flex") {
    MetaGen gen(100);
    Term m = Term::meta(1, "M"), n = Term::meta(2, "N");
    // \x. M = \x. x  has no solution: M cannot mention x.
    auto esc = unify(Term::lam("x", m), Term::lam("x", V(0)), gen);
    CHECK_FALSE(esc);

    // \x.\y. M(x) = \x.\y. f(N(x, y))  prunes y from N.
    Term lhs = Term::lam("x", Term::lam("y", Term::app(m, V(1))));
    Term rhs = Term::lam("x", Term::lam("y", A(S("f"), {A(n, {V(1), V(0)})})));
    auto pr = unify(lhs, rhs, gen);
    REQUIRE(pr);
    CHECK(sound(lhs, rhs, *pr.subst));

    // \x.\y. M(x, y) = \x.\y. N(y, x)
    Term l2 = Term::lam("x", Term::lam("y", A(m, {V(1), V(0)})));
    Term r2 = Term::lam("x", Term::lam("y", A(n, {V(0), V(1)})));
    auto ff = unify(l2, r2, gen);
    REQUIRE(ff);
    CHECK(sound(l2, r2, *ff.subst));

    // \x.\y. M(x, y) = \x.\y. M(y, x)  forces M to ignore both.
    Term r3 = Term::lam("x", Term::lam("y", A(m, {V(0), V(1)})));
    auto same = unify(l2, r3, gen);
    REQUIRE(same);
    CHECK(sound(l2, r3, *same.subst));
    Term solved = normalize(substitute(l2, *same.subst));
    CHECK(solved.body().body().args().empty());
  }

  TEST_CASE("property: normalize is idempotent") {
    Gen g(11);
    int normalized = 0;
    for (int i = 0; i < 500; ++i) {
      Term t = g.term(8, 0, 3);
      try {
        Term n = normalize(t, 2000);
        CHECK(alpha_eq(normalize(n, 2000), n));
        ++normalized;
      } catch (const Error& e) {
        CHECK(e.code() == "reduction-limit");
      }
    }
    CHECK(normalized > 400);
  }

  TEST_CASE("property: substitution commutes with normalization for ground values") {
    Gen g(12);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      Term t = g.term(8, 0, 2);
      Subst s;
      s.bind(1, g.term(4, 0, 0));
      s.bind(2, g.term(4, 0, 0));
      try {
        Term lhs = normalize(substitute(t, s), 5000);
        Term rhs = normalize(substitute(normalize(t, 5000), s), 5000);
        CHECK(alpha_eq(lhs, rhs));
        ++checked;
      } catch (const Error&) {
      }
    }
    CHECK(checked > 200);
  }

  TEST_CASE("property: unify is sound and symmetric on first-order pairs") {
    Gen g(13);
    int successes = 0;
    for (int i = 0; i < 1000; ++i) {
      Term a = g.spine(4, 3), b = g.spine(4, 3);
      MetaGen g1(100), g2(100);
      auto ab = unify(a, b, g1);
      auto ba = unify(b, a, g2);
      CHECK(static_cast<bool>(ab) == static_cast<bool>(ba));
      if (ab) {
        ++successes;
        CHECK(sound(a, b, *ab.subst));
        CHECK(sound(a, b, *ba.subst));
      }
    }
    CHECK(successes > 50);
  }

  TEST_CASE("property: unify is sound on higher-order patterns") {
    Gen g(14);
    int successes = 0;
    for (int i = 0; i < 500; ++i) {
      // \x.\y. M(subset of x, y) against \x.\y. t with t over x, y, constants and N(...)
      std::vector<Term> vars{V(1), V(0)};
      if (g.chance(0.5)) std::swap(vars[0], vars[1]);
      vars.erase(vars.begin() + g.below(3), vars.end());
      Term flex = Term::lam("x", Term::lam("y", A(Term::meta(1, "M"), vars)));
      std::function<Term(int)> rigid = [&](int size) -> Term {
        if (size <= 0 || g.chance(0.3)) {
          switch (g.below(4)) {
            case 0: return V(0);
            case 1: return V(1);
            case 2: return A(Term::meta(2, "N"), {g.chance(0.5) ? V(0) : V(1)});
            default: return S("a");
          }
        }
        return A(S(g.chance(0.5) ? "f" : "g"), {rigid(size - 1), rigid(size - 2)});
      };
      Term other = Term::lam("x", Term::lam("y", rigid(3)));
      MetaGen g1(100), g2(100);
      auto ab = unify(flex, other, g1);
      auto ba = unify(other, flex, g2);
      CHECK(static_cast<bool>(ab) == static_cast<bool>(ba));
      if (ab) {
        ++successes;
        CHECK(sound(flex, other, *ab.subst));
        CHECK(sound(flex, other, *ba.subst));
      }
    }
    CHECK(successes > 50);
  }

  TEST_CASE("property: arithmetic agrees with a GMP oracle") {
    Gen g(15);
    for (int i = 0; i < 1000; ++i) {
      Term t = random_arith(g, 6);
      Term n = normalize(t);
      REQUIRE(n.is(Term::Kind::Int));
      CHECK(n.int_value().str() == eval_oracle(t));
    }
  }

  TEST_CASE("printing") {
    CHECK(to_string(A(S("fac"), {A(S("+"), {Term::meta(3, "X"), I(1)}), I(2)})) == "fac(_X3 + 1, 2)");
    CHECK(to_string(A(S("*"), {A(S("+"), {S("a"), S("b")}), S("c")})) == "(a + b) * c");
    CHECK(to_string(A(S("-"), {S("a"), A(S("-"), {S("b"), S("c")})})) == "a - (b - c)");
    CHECK(to_string(Term::lam("x", A(S("p"), {Term::var(0, "x")}))) == "\\x. p(x)");
    // shadowing forces a rename
    CHECK(to_string(Term::lam("x", Term::lam("x", A(S("p"), {V(1), V(0)})))) == "\\x. \\x1. p(x, x1)");
  }
}
