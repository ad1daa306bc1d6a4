// Pattern unification (Miller): first-order structural unification plus
// flex terms whose arguments are distinct bound variables. Flex-flex pairs
// and out-of-scope variables under other metas are handled by pruning.

#include <algorithm>

#include "clt/term.hpp"

namespace clt {

const char* to_string(UnifyErrorKind k) {
  switch (k) {
    case UnifyErrorKind::Clash: return "clash";
    case UnifyErrorKind::Occurs: return "occurs";
    case UnifyErrorKind::NonPattern: return "non-pattern";
  }
  return "?";
}

namespace {

struct Failure {
  UnifyError error;
};

class Unifier {
 public:
  Unifier(Subst base, MetaGen& gen) : subst_(std::move(base)), gen_(gen) {}

  // Throws Failure.
  void unify(const Term& lhs, const Term& rhs, std::uint32_t depth) {
    Term a = resolve(lhs, subst_);
    Term b = resolve(rhs, subst_);
    if (alpha_eq(a, b)) return;

    const bool lam_a = a.is(Term::Kind::Lam);
    const bool lam_b = b.is(Term::Kind::Lam);
    if (lam_a && lam_b) return unify(a.body(), b.body(), depth + 1);
    if (lam_a) return unify(a.body(), eta_arg(b), depth + 1);
    if (lam_b) return unify(eta_arg(a), b.body(), depth + 1);

    const bool flex_a = a.head().is(Term::Kind::Meta);
    const bool flex_b = b.head().is(Term::Kind::Meta);
    if (flex_a && flex_b) return flex_flex(a, b, depth);
    if (flex_a) return flex_rigid(a, b, depth);
    if (flex_b) return flex_rigid(b, a, depth);

    const Term& ha = a.head();
    const Term& hb = b.head();
    if (!same_rigid_head(ha, hb)) fail(UnifyErrorKind::Clash, to_string(a) + " vs " + to_string(b));
    auto xs = a.args();
    auto ys = b.args();
    if (xs.size() != ys.size()) fail(UnifyErrorKind::Clash, "arity " + to_string(a) + " vs " + to_string(b));
    for (std::size_t i = 0; i < xs.size(); ++i) unify(xs[i], ys[i], depth);
  }

  Subst take() { return std::move(subst_); }

 private:
  [[noreturn]] static void fail(UnifyErrorKind k, std::string detail) {
    throw Failure{UnifyError{k, std::move(detail)}};
  }

  static Term eta_arg(const Term& t) { return Term::app(shift(t, 1), Term::var(0, "x")); }

  static bool same_rigid_head(const Term& a, const Term& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Term::Kind::Var: return a.var_index() == b.var_index();
      case Term::Kind::Sym: return a.name() == b.name();
      case Term::Kind::Int: return a.int_value() == b.int_value();
      default: return false;
    }
  }

  // Distinct bound variables, or nullopt.
  static std::optional<std::vector<std::uint32_t>> pattern_vars(const std::vector<Term>& args) {
    std::vector<std::uint32_t> out;
    for (const auto& a : args) {
      if (!a.is(Term::Kind::Var)) return std::nullopt;
      if (std::find(out.begin(), out.end(), a.var_index()) != out.end()) return std::nullopt;
      out.push_back(a.var_index());
    }
    return out;
  }

  static std::vector<std::uint32_t> require_pattern(const Term& flex) {
    auto vs = pattern_vars(flex.args());
    if (!vs) fail(UnifyErrorKind::NonPattern, to_string(flex));
    return *vs;
  }

  static Term wrap_lams(Term body, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
      body = Term::lam(n == 1 ? "x" : "x" + std::to_string(n - 1 - i), std::move(body));
    return body;
  }

  // Bound-variable reference to the p-th of n solution binders, k levels deep.
  static Term binder_ref(std::size_t p, std::size_t n, std::uint32_t k) {
    return Term::var(static_cast<std::uint32_t>(n - 1 - p) + k, "x" + std::to_string(p));
  }

  void flex_rigid(const Term& flex, const Term& rigid, std::uint32_t /*depth*/) {
    const MetaId m = flex.head().meta_id();
    auto xs = require_pattern(flex);
    Term body = invert(rigid, xs, m, 0);
    subst_.bind(m, wrap_lams(std::move(body), xs.size()));
  }

  // Rewrites `t` (context depth + k) into the body of a solution that
  // abstracts over `xs`.
  Term invert(const Term& t, const std::vector<std::uint32_t>& xs, MetaId m, std::uint32_t k) {
    const std::size_t n = xs.size();
    switch (t.kind()) {
      case Term::Kind::Var: {
        if (t.var_index() < k) return t;
        auto it = std::find(xs.begin(), xs.end(), t.var_index() - k);
        if (it == xs.end()) fail(UnifyErrorKind::Clash, "bound variable escapes its scope");
        return binder_ref(static_cast<std::size_t>(it - xs.begin()), n, k);
      }
      case Term::Kind::Sym:
      case Term::Kind::Int: return t;
      case Term::Kind::Lam: return Term::lam(t.name(), invert(t.body(), xs, m, k + 1));
      case Term::Kind::Meta:
        if (subst_.lookup(t.meta_id())) return invert(resolve(t, subst_), xs, m, k);
        if (t.meta_id() == m) fail(UnifyErrorKind::Occurs, meta_name(m, t.name()));
        return t;
      case Term::Kind::App: break;
    }

    const Term& h = t.head();
    auto args = t.args();
    if (!h.is(Term::Kind::Meta)) {
      Term out = invert(h, xs, m, k);
      for (const auto& a : args) out = Term::app(std::move(out), invert(a, xs, m, k));
      return out;
    }
    if (subst_.lookup(h.meta_id())) return invert(resolve(t, subst_), xs, m, k);
    if (h.meta_id() == m) fail(UnifyErrorKind::Occurs, meta_name(m, h.name()));

    auto visible = [&](const Term& a) {
      if (!a.is(Term::Kind::Var)) return true;
      if (a.var_index() < k) return true;
      return std::find(xs.begin(), xs.end(), a.var_index() - k) != xs.end();
    };
    if (std::all_of(args.begin(), args.end(), visible)) {
      Term out = h;
      for (const auto& a : args) {
        try {
          out = Term::app(std::move(out), invert(a, xs, m, k));
        } catch (const Failure&) {
          fail(UnifyErrorKind::NonPattern, to_string(t));
        }
      }
      return out;
    }
    // Prune the arguments the solution cannot see.
    auto ys = pattern_vars(args);
    if (!ys) fail(UnifyErrorKind::NonPattern, to_string(t));
    const std::size_t arity = args.size();
    Term pruned = gen_.fresh(h.name());
    Term pruned_body = pruned;
    Term out = pruned;
    for (std::size_t i = 0; i < arity; ++i) {
      if (!visible(args[i])) continue;
      pruned_body = Term::app(std::move(pruned_body), binder_ref(i, arity, 0));
      out = Term::app(std::move(out), invert(args[i], xs, m, k));
    }
    subst_.bind(h.meta_id(), wrap_lams(std::move(pruned_body), arity));
    return out;
  }

  void flex_flex(const Term& a, const Term& b, std::uint32_t /*depth*/) {
    const MetaId ma = a.head().meta_id();
    const MetaId mb = b.head().meta_id();
    auto xs = require_pattern(a);
    auto ys = require_pattern(b);

    if (ma == mb) {
      if (xs.size() != ys.size()) fail(UnifyErrorKind::Clash, "arity " + to_string(a) + " vs " + to_string(b));
      const std::size_t n = xs.size();
      Term fresh = gen_.fresh(a.head().name());
      Term body = fresh;
      for (std::size_t i = 0; i < n; ++i)
        if (xs[i] == ys[i]) body = Term::app(std::move(body), binder_ref(i, n, 0));
      subst_.bind(ma, wrap_lams(std::move(body), n));
      return;
    }

    auto subset = [](const std::vector<std::uint32_t>& small, const std::vector<std::uint32_t>& big) {
      return std::all_of(small.begin(), small.end(), [&](std::uint32_t v) {
        return std::find(big.begin(), big.end(), v) != big.end();
      });
    };
    auto express = [](const Term& target, const std::vector<std::uint32_t>& target_vars,
                      const std::vector<std::uint32_t>& over) {
      Term body = target;
      for (auto v : target_vars) {
        auto p = static_cast<std::size_t>(std::find(over.begin(), over.end(), v) - over.begin());
        body = Term::app(std::move(body), binder_ref(p, over.size(), 0));
      }
      return wrap_lams(std::move(body), over.size());
    };

    if (subset(ys, xs)) {
      subst_.bind(ma, express(b.head(), ys, xs));
      return;
    }
    if (subset(xs, ys)) {
      subst_.bind(mb, express(a.head(), xs, ys));
      return;
    }
    std::vector<std::uint32_t> common;
    for (auto v : xs)
      if (std::find(ys.begin(), ys.end(), v) != ys.end()) common.push_back(v);
    Term fresh = gen_.fresh(a.head().name());
    subst_.bind(ma, express(fresh, common, xs));
    subst_.bind(mb, express(fresh, common, ys));
  }

  Subst subst_;
  MetaGen& gen_;
};

}  // namespace

UnifyResult unify_under(const Term& a, const Term& b, const Subst& base, MetaGen& gen) {
  Unifier u(base, gen);
  try {
    u.unify(a, b, 0);
  } catch (const Failure& f) {
    return UnifyResult{std::nullopt, f.error};
  }
  return UnifyResult{u.take(), {}};
}

UnifyResult unify(const Term& a, const Term& b, MetaGen& gen) { return unify_under(a, b, Subst{}, gen); }

}  // namespace clt
