#include <algorithm>

#include "state.hpp"

namespace clt::detail {

Term resolve_in(const State& s, const Term& t) { return resolve(t, s.subst); }

Formula resolve_in(const State& s, const Formula& f) {
  return map_atoms(substitute(f, s.subst), [](const Term& t, std::uint32_t) { return normalize(t); });
}

bool is_builtin_atom(const Term& atom) {
  const Term& h = atom.head();
  if (!h.is(Term::Kind::Sym)) return false;
  auto n = atom.args().size();
  return (h.name() == ">=" && n == 2) || (h.name() == "atom_obj" && n == 1);
}

std::optional<bool> eval_builtin(const Term& atom) {
  auto args = atom.args();
  if (atom.head().name() == ">=") {
    Term a = normalize(args[0]), b = normalize(args[1]);
    if (!a.is(Term::Kind::Int) || !b.is(Term::Kind::Int)) return std::nullopt;
    return a.int_value() >= b.int_value();
  }
  Term x = normalize(args[0]);
  const Term& h = x.head();
  if (h.is(Term::Kind::Meta)) return std::nullopt;
  if (!h.is(Term::Kind::Sym)) return false;
  static const char* kCompound[] = {"and", "imp", "all", "some"};
  return std::none_of(std::begin(kCompound), std::end(kCompound), [&](const char* c) { return h.name() == c; });
}

bool atom_conjunction(const Formula& f) {
  if (f.is(Formula::Kind::Atom)) return true;
  return f.is(Formula::Kind::PAnd) && atom_conjunction(f.lhs()) && atom_conjunction(f.rhs());
}

void collect_atoms(const Formula& f, std::vector<Term>& out) {
  if (f.is(Formula::Kind::Atom)) {
    out.push_back(normalize(f.atom_term()));
    return;
  }
  collect_atoms(f.lhs(), out);
  collect_atoms(f.rhs(), out);
}

namespace {

void check_clause(const Formula& body, const Formula& whole) {
  const Formula& head = body.is(Formula::Kind::Imp) ? body.rhs() : body;
  if (!atom_conjunction(head))
    throw Error("rule-consequent", "rule consequent is not an atom conjunction: " + print_formula(whole));
}

Formula requantify(const std::vector<Formula>& quants, Formula inner) {
  for (auto it = quants.rbegin(); it != quants.rend(); ++it)
    inner = Formula::quant(it->kind(), it->name(), std::move(inner), it->prompt());
  return inner;
}

}  // namespace

void load(State& s, const Program& p, const Formula& f0, bool reusable, std::vector<AtomInst>& produced) {
  Formula f = resolve_in(s, f0);
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom: {
      const Term& t = f.atom_term();
      if (is_builtin_atom(t)) throw Error("bad-resource", "built-in atom used as a resource: " + to_string(t));
      if (!t.ground()) throw Error("non-ground-resource", "resource atom is not ground: " + to_string(t));
      if (reusable) {
        if (std::none_of(s.store.reusable.begin(), s.store.reusable.end(),
                         [&](const Term& r) { return alpha_eq(r, t); }))
          s.store.reusable.push_back(t);
      } else {
        s.store.linear.push_back({s.next_atom++, t});
        produced.push_back(s.store.linear.back());
      }
      return;
    }
    case K::Bang: load(s, p, f.body(), true, produced); return;
    case K::PAnd:
      load(s, p, f.lhs(), reusable, produced);
      load(s, p, f.rhs(), reusable, produced);
      return;
    case K::CAnd:
      if (reusable) {
        load(s, p, f.lhs(), true, produced);
        load(s, p, f.rhs(), true, produced);
      } else {
        s.store.groups.push_back({s.next_group++, f});
      }
      return;
    case K::COr:
    case K::POr:
    case K::CExi: s.pending_env.push_back({f, reusable}); return;
    case K::CUni: {
      std::vector<Formula> quants;
      Formula inner = f;
      while (inner.is(K::CUni)) {
        quants.push_back(inner);
        inner = inner.body();
      }
      if (inner.is(K::CAnd)) {
        // @X.(A & B) offers the same choices as (@X.A) & (@X.B)
        load(s, p, Formula::binary(K::CAnd, requantify(quants, inner.lhs()), requantify(quants, inner.rhs()), inner.prompt()),
             reusable, produced);
        return;
      }
      if (!(inner.is(K::Imp) || atom_conjunction(inner)))
        throw Error("bad-resource", "cannot use as a resource: " + print_formula(f));
      check_clause(inner, f);
      s.store.rules.push_back({s.next_rule++, f, reusable});
      return;
    }
    case K::Imp:
      check_clause(f, f);
      s.store.rules.push_back({s.next_rule++, f, reusable});
      return;
    case K::AgentRef: {
      const AgentDecl* a = p.agent(f.name());
      if (!a) throw Error("undeclared-agent", "undeclared agent '" + f.name() + "'");
      load(s, p, a->body, reusable, produced);
      return;
    }
  }
}

Instance instantiate_rule(const State& s, MetaGen& gen, const Rule& r) {
  Instance out;
  Formula f = resolve_in(s, r.f);
  while (f.is(Formula::Kind::CUni)) {
    Term m = gen.fresh(f.name());
    out.metas.emplace_back(f.name(), m);
    f = instantiate(f.body(), m);
  }
  if (f.is(Formula::Kind::Imp)) {
    out.antecedent = f.lhs();
    collect_atoms(f.rhs(), out.consequent);
  } else {
    collect_atoms(f, out.consequent);
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ", ";
    out += x;
  }
  return out;
}

}  // namespace

std::string atom_text(const Term& t) { return print_formula(Formula::atom(t)); }

std::string snapshot(const State& s) {
  std::vector<std::string> lin, reu, rules, goals;
  for (const auto& a : s.store.linear) lin.push_back(atom_text(a.atom));
  for (const auto& a : s.store.reusable) reu.push_back(atom_text(a));
  for (const auto& r : s.store.rules)
    if (!r.spent) rules.push_back((r.reusable ? "!" : "") + print_formula(resolve_in(s, r.f)));
  for (const auto& g : s.store.groups) rules.push_back(print_formula(resolve_in(s, g.f)));
  if (s.request) goals.push_back(print_formula(resolve_in(s, s.request->f)));
  for (auto it = s.goals.rbegin(); it != s.goals.rend(); ++it) goals.push_back(print_formula(resolve_in(s, it->f)));
  return "linear: [" + join(lin) + "]; reusable: [" + join(reu) + "]; rules: [" + join(rules) + "]; goals: [" +
         join(goals) + "]";
}

Json store_json(const State& s) {
  Json lin = Json::array(), reu = Json::array(), rules = Json::array();
  for (const auto& a : s.store.linear) lin.push_back({{"id", a.id}, {"atom", atom_text(resolve_in(s, a.atom))}});
  for (const auto& a : s.store.reusable) reu.push_back(atom_text(a));
  for (const auto& r : s.store.rules)
    if (!r.spent) rules.push_back({{"id", r.id}, {"reusable", r.reusable}, {"clause", print_formula(resolve_in(s, r.f))}});
  return Json{{"linear", lin}, {"reusable", reu}, {"rules", rules}};
}

Json render(const Ev& ev, const Subst& subst) {
  Json out = ev.fixed;
  for (const auto& [k, t] : ev.terms)
    out[k] = k == "value" ? to_string(resolve(t, subst)) : atom_text(resolve(t, subst));
  for (const auto& [k, f] : ev.formulas)
    out[k] = print_formula(map_atoms(substitute(f, subst), [](const Term& t, std::uint32_t) { return normalize(t); }));
  for (const auto& [k, atoms] : ev.atoms) {
    Json arr = Json::array();
    for (const auto& a : atoms) arr.push_back({{"id", a.id}, {"atom", atom_text(resolve(a.atom, subst))}});
    out[k] = arr;
  }
  if (ev.has_unifier) {
    Json u = Json::object();
    for (const auto& [k, t] : ev.unifier) u[k] = to_string(resolve(t, subst));
    out["unifier"] = u;
  }
  return out;
}

}  // namespace clt::detail
