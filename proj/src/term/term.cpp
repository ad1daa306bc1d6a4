#include "clt/term.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "clt/error.hpp"

namespace clt {

namespace {
struct Var {
  std::uint32_t index;
  std::string hint;
};
struct Sym {
  std::string name;
};
struct Int {
  BigInt value;
};
struct Lam {
  std::string hint;
  Term body;
};
struct App {
  Term fun;
  Term arg;
};
struct Meta {
  MetaId id;
  std::string hint;
};
}  // namespace

struct Term::Node {
  std::variant<Var, Sym, Int, Lam, App, Meta> v;
};

namespace {
template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;
}  // namespace

// ---------------------------------------------------------------- construction

Term Term::var(std::uint32_t index, std::string hint) {
  return Term(std::make_shared<const Node>(Node{Var{index, std::move(hint)}}));
}
Term Term::sym(std::string name) { return Term(std::make_shared<const Node>(Node{Sym{std::move(name)}})); }
Term Term::integer(BigInt value) { return Term(std::make_shared<const Node>(Node{Int{std::move(value)}})); }
Term Term::lam(std::string hint, Term body) {
  return Term(std::make_shared<const Node>(Node{Lam{std::move(hint), std::move(body)}}));
}
Term Term::app(Term fun, Term arg) {
  return Term(std::make_shared<const Node>(Node{App{std::move(fun), std::move(arg)}}));
}
Term Term::app(Term head, const std::vector<Term>& args) {
  for (const auto& a : args) head = app(std::move(head), a);
  return head;
}
Term Term::meta(MetaId id, std::string hint) {
  return Term(std::make_shared<const Node>(Node{Meta{id, std::move(hint)}}));
}

Term::Kind Term::kind() const noexcept { return static_cast<Kind>(node_->v.index()); }

std::uint32_t Term::var_index() const { return std::get<Var>(node_->v).index; }
const std::string& Term::name() const {
  return std::visit(overloaded{[](const Var& v) -> const std::string& { return v.hint; },
                               [](const Sym& s) -> const std::string& { return s.name; },
                               [](const Lam& l) -> const std::string& { return l.hint; },
                               [](const Meta& m) -> const std::string& { return m.hint; },
                               [](const auto&) -> const std::string& {
                                 throw std::logic_error("term has no name");
                               }},
                    node_->v);
}
const BigInt& Term::int_value() const { return std::get<Int>(node_->v).value; }
const Term& Term::body() const { return std::get<Lam>(node_->v).body; }
const Term& Term::fun() const { return std::get<App>(node_->v).fun; }
const Term& Term::arg() const { return std::get<App>(node_->v).arg; }
MetaId Term::meta_id() const { return std::get<Meta>(node_->v).id; }

const Term& Term::head() const {
  const Term* t = this;
  while (t->is(Kind::App)) t = &t->fun();
  return *t;
}

std::vector<Term> Term::args() const {
  std::vector<Term> out;
  const Term* t = this;
  while (t->is(Kind::App)) {
    out.push_back(t->arg());
    t = &t->fun();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

bool Term::ground() const {
  switch (kind()) {
    case Kind::Meta: return false;
    case Kind::Lam: return body().ground();
    case Kind::App: return fun().ground() && arg().ground();
    default: return true;
  }
}

namespace {
bool closed_at(const Term& t, std::uint32_t depth) {
  switch (t.kind()) {
    case Term::Kind::Var: return t.var_index() < depth;
    case Term::Kind::Lam: return closed_at(t.body(), depth + 1);
    case Term::Kind::App: return closed_at(t.fun(), depth) && closed_at(t.arg(), depth);
    default: return true;
  }
}
}  // namespace

bool Term::closed() const { return closed_at(*this, 0); }

bool Term::contains_meta(MetaId id) const {
  switch (kind()) {
    case Kind::Meta: return meta_id() == id;
    case Kind::Lam: return body().contains_meta(id);
    case Kind::App: return fun().contains_meta(id) || arg().contains_meta(id);
    default: return false;
  }
}

// ---------------------------------------------------------------- structure

bool alpha_eq(const Term& a, const Term& b) {
  if (a.identity() == b.identity()) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Var: return a.var_index() == b.var_index();
    case Term::Kind::Sym: return a.name() == b.name();
    case Term::Kind::Int: return a.int_value() == b.int_value();
    case Term::Kind::Lam: return alpha_eq(a.body(), b.body());
    case Term::Kind::App: return alpha_eq(a.fun(), b.fun()) && alpha_eq(a.arg(), b.arg());
    case Term::Kind::Meta: return a.meta_id() == b.meta_id();
  }
  return false;
}

Term shift(const Term& t, int by, std::uint32_t cutoff) {
  if (by == 0) return t;
  switch (t.kind()) {
    case Term::Kind::Var:
      if (t.var_index() < cutoff) return t;
      return Term::var(static_cast<std::uint32_t>(static_cast<int>(t.var_index()) + by), t.name());
    case Term::Kind::Lam: return Term::lam(t.name(), shift(t.body(), by, cutoff + 1));
    case Term::Kind::App: return Term::app(shift(t.fun(), by, cutoff), shift(t.arg(), by, cutoff));
    default: return t;
  }
}

namespace {
Term instantiate_at(const Term& t, const Term& value, std::uint32_t depth) {
  switch (t.kind()) {
    case Term::Kind::Var:
      if (t.var_index() == depth) return shift(value, static_cast<int>(depth));
      if (t.var_index() > depth) return Term::var(t.var_index() - 1, t.name());
      return t;
    case Term::Kind::Lam: return Term::lam(t.name(), instantiate_at(t.body(), value, depth + 1));
    case Term::Kind::App:
      return Term::app(instantiate_at(t.fun(), value, depth), instantiate_at(t.arg(), value, depth));
    default: return t;
  }
}
}  // namespace

Term instantiate(const Term& body, const Term& value) { return instantiate_at(body, value, 0); }

Term instantiate(const Term& t, const Term& value, std::uint32_t depth) {
  return instantiate_at(t, value, depth);
}

Term instantiate_all(const Term& body, const std::vector<Term>& values) {
  Term t = body;
  for (const auto& v : values) t = instantiate(t, v);
  return t;
}

// ---------------------------------------------------------------- normalization

bool is_arith_symbol(const std::string& name) { return name == "+" || name == "-" || name == "*"; }

bool is_builtin_symbol(const std::string& name) {
  return is_arith_symbol(name) || name == ">=" || name == "atom_obj";
}

namespace {
class Normalizer {
 public:
  explicit Normalizer(std::size_t limit) : limit_(limit) {}

  Term run(const Term& t) {
    switch (t.kind()) {
      case Term::Kind::Lam: return Term::lam(t.name(), run(t.body()));
      case Term::Kind::App: {
        Term f = run(t.fun());
        if (f.is(Term::Kind::Lam)) {
          tick();
          return run(instantiate(f.body(), t.arg()));
        }
        return arith(Term::app(std::move(f), run(t.arg())));
      }
      default: return t;
    }
  }

 private:
  void tick() {
    if (++steps_ > limit_)
      throw Error("reduction-limit", "reduction exceeded " + std::to_string(limit_) + " steps");
  }

  // Bottom-up: arguments are already normal here.
  static Term arith(Term t) {
    const Term& lhs_app = t.fun();
    if (!lhs_app.is(Term::Kind::App)) return t;
    const Term& op = lhs_app.fun();
    if (!op.is(Term::Kind::Sym) || !is_arith_symbol(op.name())) return t;
    const Term& a = lhs_app.arg();
    const Term& b = t.arg();
    if (!a.is(Term::Kind::Int) || !b.is(Term::Kind::Int)) return t;
    const auto& n = op.name();
    if (n == "+") return Term::integer(a.int_value() + b.int_value());
    if (n == "-") return Term::integer(a.int_value() - b.int_value());
    return Term::integer(a.int_value() * b.int_value());
  }

  std::size_t limit_;
  std::size_t steps_ = 0;
};
}  // namespace

Term normalize(const Term& t, std::size_t max_steps) { return Normalizer(max_steps).run(t); }

// ---------------------------------------------------------------- substitution

const Term* Subst::lookup(MetaId id) const {
  auto it = bindings_.find(id);
  return it == bindings_.end() ? nullptr : &it->second;
}

namespace {
Term substitute_at(const Term& t, const Subst& s, std::uint32_t depth) {
  switch (t.kind()) {
    case Term::Kind::Meta:
      if (const Term* v = s.lookup(t.meta_id())) return shift(*v, static_cast<int>(depth));
      return t;
    case Term::Kind::Lam: return Term::lam(t.name(), substitute_at(t.body(), s, depth + 1));
    case Term::Kind::App:
      return Term::app(substitute_at(t.fun(), s, depth), substitute_at(t.arg(), s, depth));
    default: return t;
  }
}

bool mentions_any(const Term& t, const Subst& s) {
  switch (t.kind()) {
    case Term::Kind::Meta: return s.lookup(t.meta_id()) != nullptr;
    case Term::Kind::Lam: return mentions_any(t.body(), s);
    case Term::Kind::App: return mentions_any(t.fun(), s) || mentions_any(t.arg(), s);
    default: return false;
  }
}
}  // namespace

Term substitute(const Term& t, const Subst& s) {
  if (s.empty() || !mentions_any(t, s)) return t;
  return substitute_at(t, s, 0);
}

Term resolve(const Term& t, const Subst& s) { return normalize(substitute(t, s)); }

void Subst::bind(MetaId id, const Term& value) {
  Term v = resolve(value, *this);
  Subst single;
  single.bindings_.emplace(id, v);
  for (auto& [k, existing] : bindings_) {
    if (existing.contains_meta(id)) existing = normalize(substitute(existing, single));
  }
  bindings_.insert_or_assign(id, std::move(v));
}

void Subst::compose(const Subst& later) {
  for (const auto& [id, v] : later.bindings_) {
    if (!bindings_.count(id)) bind(id, v);
  }
}

}  // namespace clt
