#include "search.hpp"

#include <algorithm>
#include <functional>

namespace clt::detail {

Ev event(const char* name) {
  Ev e;
  e.fixed = Json{{"type", "event"}, {"event", name}};
  return e;
}

namespace {

using K = Formula::Kind;

struct FireCandidate {
  std::size_t rule;
  std::vector<AtomInst> consumed;
  std::vector<Term> matched;  // reusable atoms, not consumed
  std::vector<Term> products;
  Subst subst;
  MetaGen gen;
  std::vector<std::pair<std::string, Term>> metas;
};

void erase_linear(State& s, std::uint64_t id) {
  auto& lin = s.store.linear;
  lin.erase(std::find_if(lin.begin(), lin.end(), [&](const AtomInst& a) { return a.id == id; }));
}

class Searcher {
 public:
  Searcher(const Program& p, const Options& o, std::size_t base) : p_(p), o_(o), base_(base) {}

  bool fire_cut = false;
  bool depth_cut = false;
  bool non_pattern = false;
  std::string detail;

  std::optional<State> solve(State s);

 private:
  // Alternatives at one choice point. Every alternative after the first
  // starts with a Backtrack marker in place of the abandoned line.
  class Chooser {
   public:
    Chooser(Searcher& owner, const State& parent, const Formula& goal)
        : owner_(owner), parent_(parent), goal_(goal) {}

    State branch() const {
      State a = parent_;
      if (tried_ > 0) {
        Ev m = event("Backtrack");
        m.fixed["reason"] = "alternative";
        m.fixed["alternative"] = tried_;
        m.fixed["resume_at"] = owner_.base_ + length(parent_.events);
        m.formulas.emplace_back("goal", goal_);
        a.events = push(a.events, std::move(m));
      }
      return a;
    }

    std::optional<State> descend(State a) {
      ++tried_;
      return owner_.solve(std::move(a));
    }

   private:
    Searcher& owner_;
    const State& parent_;
    Formula goal_;
    std::size_t tried_ = 0;
  };

  void note(const UnifyResult& u) {
    if (!u && u.error.kind == UnifyErrorKind::NonPattern) {
      non_pattern = true;
      detail = u.error.detail;
    }
  }

  std::optional<State> atom_goal(const State& s, const Goal& g, const Term& atom);
  bool imp_goal(State& s, const Goal& g);
  std::vector<FireCandidate> fire_candidates(const State& s);

  const Program& p_;
  const Options& o_;
  std::size_t base_;
};

std::optional<State> Searcher::solve(State s) {
  while (true) {
    if (s.depth >= o_.limits.max_depth) {
      depth_cut = true;
      return std::nullopt;
    }
    ++s.depth;
    if (!s.pending_env.empty()) {
      PendingEnv pe = s.pending_env.front();
      s.pending_env.erase(s.pending_env.begin());
      auto what = pe.f.is(K::CExi) ? Request::What::ResourceValue : Request::What::ResourceBranch;
      s.request = Request{what, pe.f, pe.reusable};
      return s;
    }
    if (s.goals.empty()) return s;

    Goal g = std::move(s.goals.back());
    s.goals.pop_back();
    switch (g.f.kind()) {
      case K::Atom: {
        Term atom = resolve_in(s, g.f.atom_term());
        if (is_builtin_atom(atom)) {
          auto v = eval_builtin(atom);
          if (!v || !*v) return std::nullopt;
          Ev e = event("BuiltinCheck");
          e.terms.emplace_back("atom", atom);
          e.fixed["truth"] = true;
          s.events = push(s.events, std::move(e));
          continue;
        }
        return atom_goal(s, g, atom);
      }
      case K::PAnd:
        s.goals.push_back({g.f.rhs(), g.query_level});
        s.goals.push_back({g.f.lhs(), g.query_level});
        continue;
      case K::POr:
      case K::COr: {
        Chooser ch(*this, s, g.f);
        for (int side = 0; side < 2; ++side) {
          State a = ch.branch();
          const Formula& chosen = side ? g.f.rhs() : g.f.lhs();
          Ev e = event(side ? "ChooseRight" : "ChooseLeft");
          e.fixed["side"] = "goal";
          e.formulas.emplace_back("chosen", chosen);
          a.events = push(a.events, std::move(e));
          a.goals.push_back({chosen, g.query_level});
          if (auto r = ch.descend(std::move(a))) return r;
        }
        return std::nullopt;
      }
      case K::CExi: {
        Term m = s.gen.fresh(g.f.name());
        if (g.query_level) s.bindings.emplace_back(g.f.name(), m);
        Ev e = event("Instantiate");
        e.fixed["variable"] = g.f.name();
        e.fixed["meta"] = meta_name(m.meta_id(), g.f.name());
        e.terms.emplace_back("value", m);
        s.events = push(s.events, std::move(e));
        s.goals.push_back({instantiate(g.f.body(), m), g.query_level});
        continue;
      }
      case K::CAnd:
        s.request = Request{Request::What::GoalBranch, g.f, g.query_level};
        return s;
      case K::CUni:
        s.request = Request{Request::What::GoalValue, g.f, g.query_level};
        return s;
      case K::Imp: {
        if (!imp_goal(s, g)) return std::nullopt;
        continue;
      }
      case K::Bang:
        for (std::size_t i = 0; i < std::max<std::size_t>(1, o_.bang_copies); ++i)
          s.goals.push_back({g.f.body(), g.query_level});
        continue;
      case K::AgentRef: {
        const AgentDecl* a = p_.agent(g.f.name());
        if (!a) throw Error("undeclared-agent", "undeclared agent '" + g.f.name() + "'");
        Ev e = event("UnfoldAgent");
        e.fixed["agent"] = g.f.name();
        s.events = push(s.events, std::move(e));
        s.goals.push_back({a->body, false});
        continue;
      }
    }
  }
}

bool Searcher::imp_goal(State& s, const Goal& g) {
  Formula ante = resolve_in(s, g.f.lhs());
  if (ante.is(K::Atom) && is_builtin_atom(ante.atom_term())) {
    auto v = eval_builtin(ante.atom_term());
    if (!v) return false;
    Ev e = event("BuiltinCheck");
    e.terms.emplace_back("atom", ante.atom_term());
    e.fixed["truth"] = *v;
    s.events = push(s.events, std::move(e));
    // a false antecedent wins the implication outright
    if (*v) s.goals.push_back({g.f.rhs(), g.query_level});
    return true;
  }
  std::vector<AtomInst> produced;
  try {
    load(s, p_, ante, false, produced);
  } catch (const Error&) {
    return false;
  }
  Ev e = event("Assume");
  e.formulas.emplace_back("formula", ante);
  e.atoms.emplace_back("produced", produced);
  s.events = push(s.events, std::move(e));
  s.goals.push_back({g.f.rhs(), g.query_level});
  return true;
}

std::optional<State> Searcher::atom_goal(const State& s, const Goal& g, const Term& atom) {
  Chooser ch(*this, s, g.f);

  std::vector<Term> seen;
  for (const auto& inst : s.store.linear) {
    if (std::any_of(seen.begin(), seen.end(), [&](const Term& t) { return alpha_eq(t, inst.atom); })) continue;
    seen.push_back(inst.atom);
    MetaGen gen = s.gen;
    auto u = unify_under(atom, inst.atom, s.subst, gen);
    note(u);
    if (!u) continue;
    State a = ch.branch();
    a.subst = std::move(*u.subst);
    a.gen = gen;
    erase_linear(a, inst.id);
    Ev e = event("MatchStore");
    e.terms.emplace_back("goal", atom);
    e.atoms.emplace_back("consumed", std::vector<AtomInst>{inst});
    a.events = push(a.events, std::move(e));
    if (auto r = ch.descend(std::move(a))) return r;
  }
  for (const auto& t : s.store.reusable) {
    MetaGen gen = s.gen;
    auto u = unify_under(atom, t, s.subst, gen);
    note(u);
    if (!u) continue;
    State a = ch.branch();
    a.subst = std::move(*u.subst);
    a.gen = gen;
    Ev e = event("MatchStore");
    e.terms.emplace_back("goal", atom);
    e.terms.emplace_back("reusable", t);
    a.events = push(a.events, std::move(e));
    if (auto r = ch.descend(std::move(a))) return r;
  }

  const Term& head = atom.head();
  if (head.is(Term::Kind::Sym) && p_.is_output(head.name(), atom.args().size()) && atom.ground()) {
    State a = ch.branch();
    a.outputs.push_back(atom);
    Ev e = event("EmitOutput");
    e.terms.emplace_back("atom", atom);
    a.events = push(a.events, std::move(e));
    if (auto r = ch.descend(std::move(a))) return r;
  }

  for (std::size_t i = 0; i < s.store.rules.size(); ++i) {
    const Rule& rule = s.store.rules[i];
    if (rule.spent) continue;
    MetaGen gen = s.gen;
    Instance inst = instantiate_rule(s, gen, rule);
    if (inst.consequent.size() != 1) continue;
    auto u = unify_under(atom, inst.consequent[0], s.subst, gen);
    note(u);
    if (!u) continue;
    State a = ch.branch();
    a.subst = std::move(*u.subst);
    a.gen = gen;
    if (!rule.reusable) a.store.rules[i].spent = true;
    if (inst.antecedent) a.goals.push_back({*inst.antecedent, false});
    Ev e = event("Backchain");
    e.fixed["rule"] = rule.id;
    e.terms.emplace_back("goal", atom);
    e.unifier = inst.metas;
    e.has_unifier = true;
    a.events = push(a.events, std::move(e));
    if (auto r = ch.descend(std::move(a))) return r;
  }

  auto fires = fire_candidates(s);
  if (!fires.empty() && s.fires >= s.bound) fire_cut = true;
  if (s.fires < s.bound) {
    for (auto& c : fires) {
      State a = ch.branch();
      a.subst = std::move(c.subst);
      a.gen = c.gen;
      for (const auto& used : c.consumed) erase_linear(a, used.id);
      std::vector<AtomInst> produced;
      for (const auto& t : c.products) {
        a.store.linear.push_back({a.next_atom++, t});
        produced.push_back(a.store.linear.back());
      }
      ++a.fires;
      const Rule& rule = s.store.rules[c.rule];
      if (!rule.reusable) a.store.rules[c.rule].spent = true;
      Ev e = event("ForwardFire");
      e.fixed["rule"] = rule.id;
      e.atoms.emplace_back("consumed", c.consumed);
      if (!c.matched.empty()) {
        Json m = Json::array();
        for (const auto& t : c.matched) m.push_back(to_string(t));
        e.fixed["matched"] = m;
      }
      e.atoms.emplace_back("produced", produced);
      e.unifier = c.metas;
      e.has_unifier = true;
      a.events = push(a.events, std::move(e));
      a.goals.push_back(g);
      if (auto r = ch.descend(std::move(a))) return r;
    }
  }

  for (std::size_t i = 0; i < s.store.groups.size(); ++i) {
    for (int side = 0; side < 2; ++side) {
      State a = ch.branch();
      Group group = a.store.groups[i];
      a.store.groups.erase(a.store.groups.begin() + static_cast<std::ptrdiff_t>(i));
      const Formula& chosen = side ? group.f.rhs() : group.f.lhs();
      std::vector<AtomInst> produced;
      try {
        load(a, p_, chosen, false, produced);
      } catch (const Error&) {
        continue;
      }
      Ev e = event(side ? "ChooseRight" : "ChooseLeft");
      e.fixed["side"] = "resource";
      e.formulas.emplace_back("chosen", chosen);
      e.atoms.emplace_back("produced", produced);
      a.events = push(a.events, std::move(e));
      a.goals.push_back(g);
      if (auto r = ch.descend(std::move(a))) return r;
    }
  }
  return std::nullopt;
}

std::vector<FireCandidate> Searcher::fire_candidates(const State& s) {
  std::vector<FireCandidate> out;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < s.store.rules.size(); ++i) {
    const Rule& rule = s.store.rules[i];
    if (rule.spent) continue;
    MetaGen gen0 = s.gen;
    Instance inst = instantiate_rule(s, gen0, rule);
    if (!inst.antecedent || !atom_conjunction(*inst.antecedent)) continue;
    std::vector<Term> ante, matchable, checks;
    collect_atoms(*inst.antecedent, ante);
    for (auto& t : ante) (is_builtin_atom(t) ? checks : matchable).push_back(t);
    if (matchable.empty()) continue;

    std::vector<AtomInst> consumed;
    std::vector<Term> matched;
    auto finish = [&](const Subst& sub, const MetaGen& gen) {
      for (const auto& c : checks) {
        auto v = eval_builtin(resolve(c, sub));
        if (!v || !*v) return;
      }
      std::vector<Term> products;
      for (const auto& c : inst.consequent) {
        Term t = resolve(c, sub);
        if (!t.ground() || is_builtin_atom(t)) return;
        products.push_back(t);
      }
      std::string key = std::to_string(rule.id);
      for (const auto& a : consumed) key += "|" + to_string(a.atom);
      key += "#";
      for (const auto& m : matched) key += "|" + to_string(m);
      if (std::find(keys.begin(), keys.end(), key) != keys.end()) return;
      keys.push_back(key);
      out.push_back({i, consumed, matched, std::move(products), sub, gen, inst.metas});
    };

    std::function<void(std::size_t, const Subst&, const MetaGen&)> match = [&](std::size_t k, const Subst& sub,
                                                                              const MetaGen& gen) {
      if (k == matchable.size()) {
        finish(sub, gen);
        return;
      }
      Term want = resolve(matchable[k], sub);
      std::vector<Term> seen;
      for (const auto& a : s.store.linear) {
        if (std::any_of(consumed.begin(), consumed.end(), [&](const AtomInst& c) { return c.id == a.id; })) continue;
        if (std::any_of(seen.begin(), seen.end(), [&](const Term& t) { return alpha_eq(t, a.atom); })) continue;
        seen.push_back(a.atom);
        MetaGen g2 = gen;
        auto u = unify_under(want, a.atom, sub, g2);
        note(u);
        if (!u) continue;
        consumed.push_back(a);
        match(k + 1, *u.subst, g2);
        consumed.pop_back();
      }
      for (const auto& t : s.store.reusable) {
        MetaGen g2 = gen;
        auto u = unify_under(want, t, sub, g2);
        note(u);
        if (!u) continue;
        matched.push_back(t);
        match(k + 1, *u.subst, g2);
        matched.pop_back();
      }
    };
    match(0, s.subst, gen0);
  }
  return out;
}

}  // namespace

SegmentResult run_segment(const Program& program, const Options& options, const State& start,
                          std::size_t trace_base) {
  SegmentResult out;
  bool depth_cut = false;
  for (std::size_t bound = 0;; ++bound) {
    Searcher search(program, options, trace_base);
    State s = start;
    s.bound = bound;
    s.depth = 0;
    if (bound > 0) {
      Ev m = event("Backtrack");
      m.fixed["reason"] = "deepen";
      m.fixed["bound"] = bound;
      m.fixed["resume_at"] = trace_base + length(start.events);
      s.events = push(s.events, std::move(m));
    }
    auto r = search.solve(std::move(s));
    if (r) {
      out.state = std::move(r);
      out.status = Status::Won;
      return out;
    }
    if (search.non_pattern) {
      out.non_pattern = true;
      out.detail = search.detail;
    }
    depth_cut = depth_cut || search.depth_cut;
    if (!search.fire_cut) {
      out.status = depth_cut ? Status::ResourceLimit : Status::Lost;
      return out;
    }
    if (bound >= options.limits.max_fires) {
      out.status = Status::ResourceLimit;
      return out;
    }
  }
}

}  // namespace clt::detail
