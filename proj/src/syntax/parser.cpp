#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "clt/syntax.hpp"
#include "lexer.hpp"

namespace clt {

using detail::Tok;
using detail::Token;

// ---------------------------------------------------------------- Program

const AgentDecl* Program::agent(const std::string& name) const {
  for (const auto& d : declarations)
    if (auto* a = std::get_if<AgentDecl>(&d); a && a->name == name) return a;
  return nullptr;
}

std::vector<const AgentDecl*> Program::agents() const {
  std::vector<const AgentDecl*> out;
  for (const auto& d : declarations)
    if (auto* a = std::get_if<AgentDecl>(&d)) out.push_back(a);
  return out;
}

bool Program::is_output(const std::string& predicate, std::size_t arity) const {
  for (const auto& d : declarations)
    if (auto* o = std::get_if<OutputDecl>(&d); o && o->predicate == predicate && o->arity == arity) return true;
  return false;
}

const DomainDecl* Program::domain(const std::string& variable) const {
  for (const auto& d : declarations)
    if (auto* o = std::get_if<DomainDecl>(&d); o && o->variable == variable) return o;
  return nullptr;
}

std::vector<std::string> Program::agent_names() const {
  std::vector<std::string> out;
  for (const auto* a : agents()) out.push_back(a->name);
  return out;
}

namespace {

bool is_upper_name(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }

bool is_keyword(const std::string& s) {
  return s == "agent" || s == "output" || s == "domain" || s == "prompt";
}

// ---------------------------------------------------------------- surface AST

struct STerm {
  enum class K { Name, Int, Lam, App } k = K::Name;
  std::string name;
  BigInt value;
  std::vector<STerm> kids;
  SourcePos pos;
};

struct SFormula {
  Formula::Kind kind = Formula::Kind::Atom;
  STerm atom;
  std::vector<SFormula> kids;
  std::string name;
  std::string prompt;
  bool explicit_agent = false;
  SourcePos pos;
};

STerm make_app(STerm f, STerm a) {
  STerm t;
  t.k = STerm::K::App;
  t.pos = f.pos;
  t.kids = {std::move(f), std::move(a)};
  return t;
}

STerm make_name(std::string n, SourcePos pos) {
  STerm t;
  t.name = std::move(n);
  t.pos = pos;
  return t;
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(detail::lex(text)) {}

  bool done() const { return peek().kind == Tok::End; }
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  const std::vector<Token>& tokens() const { return toks_; }

  bool at(std::string_view punct, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == Tok::Punct && t.text == punct;
  }
  bool at_ident(std::string_view word, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == Tok::Ident && t.text == word;
  }

  [[noreturn]] void error(const std::string& msg) const { throw ParseError(peek().pos, msg + describe(peek())); }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return " at end of input";
      case Tok::String: return " at string";
      default: return " at '" + t.text + "'";
    }
  }

  Token next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  void expect(std::string_view punct) {
    if (!at(punct)) error("expected '" + std::string(punct) + "'");
    next();
  }

  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident) error(std::string("expected ") + what);
    return next().text;
  }

  // ----- formulas

  SFormula formula() { return imp(); }

  SFormula imp() {
    SFormula lhs = binary_chain(0);
    if (at("->")) {
      SourcePos pos = peek().pos;
      next();
      SFormula rhs = imp();
      return make_binary(Formula::Kind::Imp, std::move(lhs), std::move(rhs), pos);
    }
    return lhs;
  }

  // Left-associative levels: | & \/ /\ (loosest first).
  SFormula binary_chain(int level) {
    static const std::pair<const char*, Formula::Kind> kOps[] = {
        {"|", Formula::Kind::COr},
        {"&", Formula::Kind::CAnd},
        {"\\/", Formula::Kind::POr},
        {"/\\", Formula::Kind::PAnd},
    };
    if (level == 4) return prefix();
    SFormula lhs = binary_chain(level + 1);
    while (at(kOps[level].first)) {
      SourcePos pos = peek().pos;
      next();
      SFormula rhs = binary_chain(level + 1);
      lhs = make_binary(kOps[level].second, std::move(lhs), std::move(rhs), pos);
    }
    return lhs;
  }

  static SFormula make_binary(Formula::Kind k, SFormula l, SFormula r, SourcePos pos) {
    SFormula f;
    f.kind = k;
    f.pos = pos;
    f.kids = {std::move(l), std::move(r)};
    return f;
  }

  SFormula prefix() {
    SourcePos pos = peek().pos;
    if (at("!")) {
      next();
      SFormula f;
      f.kind = Formula::Kind::Bang;
      f.pos = pos;
      f.kids = {prefix()};
      return f;
    }
    if (at("@") || at("#")) {
      bool uni = at("@");
      next();
      SFormula f;
      f.kind = uni ? Formula::Kind::CUni : Formula::Kind::CExi;
      f.pos = pos;
      f.name = expect_ident("a variable after the quantifier");
      if (is_keyword(f.name)) throw ParseError(pos, "keyword '" + f.name + "' cannot be a variable");
      expect(".");
      f.kids = {prefix()};
      return f;
    }
    if (at_ident("prompt") && peek(1).kind == Tok::String) {
      next();
      std::string text = next().text;
      SFormula f = prefix();
      bool choice = f.kind == Formula::Kind::CAnd || f.kind == Formula::Kind::COr ||
                    f.kind == Formula::Kind::CUni || f.kind == Formula::Kind::CExi;
      if (!choice) throw ParseError(pos, "prompt annotation must precede a choice operator");
      f.prompt = std::move(text);
      return f;
    }
    if (at_ident("agent") && peek(1).kind == Tok::Ident) {
      next();
      SFormula f;
      f.kind = Formula::Kind::AgentRef;
      f.pos = pos;
      f.name = next().text;
      f.explicit_agent = true;
      return f;
    }
    return primary();
  }

  SFormula primary() {
    if (at("(")) {
      std::size_t save = i_;
      std::optional<ParseError> grouped_error;
      try {
        next();
        SFormula f = formula();
        expect(")");
        if (!(at(">=") || at("+") || at("-") || at("*") || at("("))) return f;
      } catch (const ParseError& e) {
        grouped_error = e;
      }
      std::size_t grouped_end = i_;
      i_ = save;
      try {
        return atom();
      } catch (const ParseError& e) {
        if (grouped_error && grouped_end > i_) throw *grouped_error;
        throw;
      }
    }
    return atom();
  }

  SFormula atom() {
    SFormula f;
    f.kind = Formula::Kind::Atom;
    f.pos = peek().pos;
    STerm t = term();
    if (at(">=")) {
      SourcePos pos = peek().pos;
      next();
      STerm u = term();
      t = make_app(make_app(make_name(">=", pos), std::move(t)), std::move(u));
    }
    f.atom = std::move(t);
    return f;
  }

  // ----- terms

  STerm term() {
    STerm lhs = mul();
    while (at("+") || at("-")) {
      Token op = next();
      STerm rhs = mul();
      lhs = make_app(make_app(make_name(op.text, op.pos), std::move(lhs)), std::move(rhs));
    }
    return lhs;
  }

  STerm mul() {
    STerm lhs = app();
    while (at("*")) {
      Token op = next();
      STerm rhs = app();
      lhs = make_app(make_app(make_name(op.text, op.pos), std::move(lhs)), std::move(rhs));
    }
    return lhs;
  }

  STerm app() {
    STerm t = prim();
    while (at("(")) {
      next();
      if (at(")")) error("expected an argument");
      while (true) {
        t = make_app(std::move(t), term());
        if (at(",")) {
          next();
          continue;
        }
        expect(")");
        break;
      }
    }
    return t;
  }

  STerm prim() {
    const Token& tok = peek();
    SourcePos pos = tok.pos;
    if (tok.kind == Tok::Int) {
      STerm t;
      t.k = STerm::K::Int;
      t.value = BigInt(next().text);
      t.pos = pos;
      return t;
    }
    if (at("-") && peek(1).kind == Tok::Int) {
      next();
      STerm t;
      t.k = STerm::K::Int;
      t.value = -BigInt(next().text);
      t.pos = pos;
      return t;
    }
    if (tok.kind == Tok::Ident) {
      if (is_keyword(tok.text)) error("unexpected keyword");
      return make_name(next().text, pos);
    }
    if (at("\\")) {
      next();
      STerm t;
      t.k = STerm::K::Lam;
      t.pos = pos;
      t.name = expect_ident("a lambda parameter");
      expect(".");
      t.kids = {term()};
      return t;
    }
    if (at("(")) {
      for (const char* op : {"+", "-", "*", ">="}) {
        if (at(op, 1) && at(")", 2)) {
          next();
          std::string name = next().text;
          next();
          return make_name(name, pos);
        }
      }
      next();
      STerm t = term();
      expect(")");
      return t;
    }
    error("expected a term");
  }

  std::size_t position() const { return i_; }

 private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

// ---------------------------------------------------------------- desugaring

void term_uppercase_occurrences(const STerm& t, std::vector<std::string>& local,
                                const std::vector<std::string>& bound, std::vector<std::string>& out) {
  switch (t.k) {
    case STerm::K::Name: {
      if (!is_upper_name(t.name)) return;
      if (std::find(local.begin(), local.end(), t.name) != local.end()) return;
      if (std::find(bound.begin(), bound.end(), t.name) != bound.end()) return;
      out.push_back(t.name);
      return;
    }
    case STerm::K::Int: return;
    case STerm::K::Lam:
      local.push_back(t.name);
      term_uppercase_occurrences(t.kids[0], local, bound, out);
      local.pop_back();
      return;
    case STerm::K::App:
      term_uppercase_occurrences(t.kids[0], local, bound, out);
      term_uppercase_occurrences(t.kids[1], local, bound, out);
      return;
  }
}

// Each clause (the outermost implication around an occurrence, or else the
// atom itself) has its own variables, as in Prolog, bound around the clause.
class Desugarer {
 public:
  SFormula run(const SFormula& root) {
    std::vector<std::string> bound;
    std::vector<const SFormula*> path;
    collect(root, bound, path);
    for (const auto& key : order_) targets_[key.second].push_back(key.first);
    return rebuild(root);
  }

 private:
  using Key = std::pair<std::string, const SFormula*>;

  void collect(const SFormula& f, std::vector<std::string>& bound, std::vector<const SFormula*>& path) {
    path.push_back(&f);
    if (f.kind == Formula::Kind::Atom) {
      std::vector<std::string> local, found;
      term_uppercase_occurrences(f.atom, local, bound, found);
      const SFormula* clause = &f;
      for (const auto* node : path)
        if (node->kind == Formula::Kind::Imp) {
          clause = node;
          break;
        }
      for (const auto& n : found) {
        Key key{n, clause};
        if (std::find(order_.begin(), order_.end(), key) == order_.end()) order_.push_back(key);
      }
    } else if (f.kind == Formula::Kind::CUni || f.kind == Formula::Kind::CExi) {
      bound.push_back(f.name);
      collect(f.kids[0], bound, path);
      bound.pop_back();
    } else {
      for (const auto& k : f.kids) collect(k, bound, path);
    }
    path.pop_back();
  }

  SFormula rebuild(const SFormula& f) {
    SFormula out = f;
    out.kids.clear();
    for (const auto& k : f.kids) out.kids.push_back(rebuild(k));
    auto it = targets_.find(&f);
    if (it != targets_.end()) {
      for (auto v = it->second.rbegin(); v != it->second.rend(); ++v) {
        SFormula q;
        q.kind = Formula::Kind::CUni;
        q.name = *v;
        q.pos = f.pos;
        q.kids = {std::move(out)};
        out = std::move(q);
      }
    }
    return out;
  }

  std::vector<Key> order_;
  std::map<const SFormula*, std::vector<std::string>> targets_;
};

// ---------------------------------------------------------------- resolution

class Resolver {
 public:
  explicit Resolver(std::set<std::string> agents) : agents_(std::move(agents)) {}

  Formula formula(const SFormula& f) {
    switch (f.kind) {
      case Formula::Kind::Atom: {
        if (f.atom.k == STerm::K::Name && !is_upper_name(f.atom.name) && !in_scope(f.atom.name) &&
            agents_.count(f.atom.name))
          return Formula::agent_ref(f.atom.name);
        Term t = term(f.atom);
        check_atom(t, f.pos);
        return Formula::atom(std::move(t));
      }
      case Formula::Kind::AgentRef:
        if (!agents_.count(f.name)) throw ParseError(f.pos, "undeclared agent '" + f.name + "'");
        return Formula::agent_ref(f.name);
      case Formula::Kind::Bang: return Formula::bang(formula(f.kids[0]));
      case Formula::Kind::CUni:
      case Formula::Kind::CExi: {
        scope_.push_back(f.name);
        Formula body = formula(f.kids[0]);
        scope_.pop_back();
        return Formula::quant(f.kind, f.name, std::move(body), f.prompt);
      }
      default: return Formula::binary(f.kind, formula(f.kids[0]), formula(f.kids[1]), f.prompt);
    }
  }

  Term term(const STerm& t) {
    switch (t.k) {
      case STerm::K::Name: {
        for (std::size_t i = scope_.size(); i-- > 0;)
          if (scope_[i] == t.name) return Term::var(static_cast<std::uint32_t>(scope_.size() - 1 - i), t.name);
        if (is_upper_name(t.name)) throw ParseError(t.pos, "unbound variable '" + t.name + "'");
        return Term::sym(t.name);
      }
      case STerm::K::Int: return Term::integer(t.value);
      case STerm::K::Lam: {
        scope_.push_back(t.name);
        Term body = term(t.kids[0]);
        scope_.pop_back();
        return Term::lam(t.name, std::move(body));
      }
      case STerm::K::App: return Term::app(term(t.kids[0]), term(t.kids[1]));
    }
    throw std::logic_error("bad surface term");
  }

 private:
  bool in_scope(const std::string& n) const { return std::find(scope_.begin(), scope_.end(), n) != scope_.end(); }

  static void check_atom(const Term& t, SourcePos pos) {
    Term n = normalize(t);
    const Term& h = n.head();
    if (h.is(Term::Kind::Sym) && is_arith_symbol(h.name()))
      throw ParseError(pos, "arithmetic expression used as an atom");
    if (!(h.is(Term::Kind::Sym) || h.is(Term::Kind::Var) || h.is(Term::Kind::Meta)))
      throw ParseError(pos, "expected an atom");
  }

  std::set<std::string> agents_;
  std::vector<std::string> scope_;
};

Formula finish(const SFormula& surface, const std::set<std::string>& agents) {
  SFormula desugared = Desugarer().run(surface);
  return Resolver(agents).formula(desugared);
}

std::set<std::string> prescan_agents(const std::vector<Token>& toks) {
  std::set<std::string> names;
  for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
    bool decl_start = i == 0 || (toks[i - 1].kind == Tok::Punct && toks[i - 1].text == ".");
    if (decl_start && toks[i].kind == Tok::Ident && toks[i].text == "agent" && toks[i + 1].kind == Tok::Ident &&
        toks[i + 2].kind == Tok::Punct && toks[i + 2].text == "=")
      names.insert(toks[i + 1].text);
  }
  return names;
}

Term ground_term(Parser& p) {
  STerm s = p.term();
  return normalize(Resolver({}).term(s));
}

}  // namespace

Program parse_program(std::string_view text) {
  Parser p(text);
  const auto agents = prescan_agents(p.tokens());
  Program prog;
  std::set<std::string> seen;

  while (!p.done()) {
    SourcePos pos = p.peek().pos;
    if (p.at("?-")) {
      p.next();
      SFormula q = p.formula();
      p.expect(".");
      prog.queries.push_back(finish(q, agents));
      continue;
    }
    if (p.at_ident("agent")) {
      p.next();
      SourcePos name_pos = p.peek().pos;
      std::string name = p.expect_ident("an agent name");
      if (is_builtin_symbol(name) || is_keyword(name))
        throw ParseError(name_pos, "redefinition of built-in '" + name + "'");
      if (!seen.insert(name).second) throw ParseError(name_pos, "duplicate agent '" + name + "'");
      p.expect("=");
      SFormula body = p.formula();
      p.expect(".");
      prog.declarations.emplace_back(AgentDecl{name, finish(body, agents), name_pos});
      continue;
    }
    if (p.at_ident("output")) {
      p.next();
      SourcePos name_pos = p.peek().pos;
      std::string name = p.expect_ident("a predicate name");
      if (is_builtin_symbol(name)) throw ParseError(name_pos, "redefinition of built-in '" + name + "'");
      p.expect("/");
      if (p.peek().kind != Tok::Int) p.error("expected an arity");
      std::size_t arity = std::stoul(p.next().text);
      p.expect(".");
      prog.declarations.emplace_back(OutputDecl{name, arity});
      continue;
    }
    if (p.at_ident("domain")) {
      p.next();
      std::string var = p.expect_ident("a variable name");
      p.expect("=");
      p.expect("{");
      DomainDecl d{var, {}};
      while (true) {
        d.values.push_back(ground_term(p));
        if (p.at(",")) {
          p.next();
          continue;
        }
        break;
      }
      p.expect("}");
      p.expect(".");
      prog.declarations.emplace_back(std::move(d));
      continue;
    }
    throw ParseError(pos, "expected a declaration" + Parser::describe(p.peek()));
  }
  return prog;
}

Formula parse_query(std::string_view text, const Program& program) {
  Parser p(text);
  if (p.at("?-")) p.next();
  SFormula q = p.formula();
  if (p.at(".")) p.next();
  if (!p.done()) p.error("unexpected input after query");
  auto names = program.agent_names();
  return finish(q, std::set<std::string>(names.begin(), names.end()));
}

Term parse_term(std::string_view text) {
  Parser p(text);
  Term t = ground_term(p);
  if (!p.done()) p.error("unexpected input after term");
  return t;
}

}  // namespace clt
