#include <pthread.h>

#include <exception>
#include <functional>
#include <sstream>

#include "search.hpp"

namespace clt {

using detail::Ev;
using detail::Request;
using detail::State;

const char* to_string(Status s) {
  switch (s) {
    case Status::Won: return "won";
    case Status::Lost: return "lost";
    case Status::ResourceLimit: return "resource-limit";
  }
  return "?";
}

// ---------------------------------------------------------------- records

Json to_json(const EnvRequest& r) {
  Json j{{"type", "env_request"}, {"choice_id", r.choice_id}};
  if (r.kind == EnvRequest::Kind::Branch) {
    j["kind"] = "branch";
    j["options"] = r.options;
  } else {
    j["kind"] = "value";
    j["variable"] = r.variable;
    if (r.domain) {
      Json d = Json::array();
      for (const auto& t : *r.domain) d.push_back(to_string(t));
      j["domain"] = d;
    }
  }
  j["prompt"] = r.prompt;
  j["snapshot"] = r.snapshot;
  return j;
}

namespace {

std::string pick_text(const EnvMove& m) {
  if (auto* side = std::get_if<Side>(&m.pick)) return *side == Side::Left ? "left" : "right";
  return to_string(std::get<Term>(m.pick));
}

}  // namespace

Json to_json(const EnvMove& m) { return Json{{"type", "env_move"}, {"choice_id", m.choice_id}, {"pick", pick_text(m)}}; }

Json to_json(const Outcome& o) {
  Json b = Json::object();
  for (const auto& [name, t] : o.bindings) b[name] = to_string(t);
  Json out = Json::array();
  for (const auto& t : o.outputs) out.push_back(to_string(t));
  Json j{{"type", "result"}, {"status", to_string(o.status)}, {"bindings", b}, {"outputs", out},
         {"final_store", o.final_store}};
  if (!o.diagnostic.empty()) j["diagnostic"] = o.diagnostic;
  return j;
}

EnvMove parse_pick(std::uint64_t choice_id, const std::string& text) {
  if (text == "left") return {choice_id, Side::Left};
  if (text == "right") return {choice_id, Side::Right};
  return {choice_id, parse_term(text)};
}

EnvMove env_move_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("choice_id") || !j.contains("pick") || !j["choice_id"].is_number_unsigned() ||
      !j["pick"].is_string())
    throw Error("malformed", "env_move needs an unsigned choice_id and a string pick");
  return parse_pick(j["choice_id"].get<std::uint64_t>(), j["pick"].get<std::string>());
}

std::vector<Json> parse_trace(std::string_view text) {
  std::vector<Json> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw Error("malformed", std::string("bad trace record: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- session

namespace {

// Deep searches recurse once per choice point; give them room.
void run_with_large_stack(const std::function<void()>& fn) {
  struct Job {
    const std::function<void()>* fn;
    std::exception_ptr error;
  } job{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, std::size_t{512} << 20);
  pthread_t th;
  auto entry = [](void* p) -> void* {
    auto* j = static_cast<Job*>(p);
    try {
      (*j->fn)();
    } catch (...) {
      j->error = std::current_exception();
    }
    return nullptr;
  };
  if (pthread_create(&th, &attr, entry, &job) != 0) {
    pthread_attr_destroy(&attr);
    fn();
    return;
  }
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  if (job.error) std::rethrow_exception(job.error);
}

std::vector<Ev> events_of(const detail::EvList& l) {
  std::vector<Ev> out;
  for (const auto* n = l.get(); n; n = n->prev.get()) out.push_back(n->ev);
  return {out.rbegin(), out.rend()};
}

}  // namespace

struct Session::Impl {
  Program program;
  Options options;
  State state;
  std::vector<Json> trace;
  std::optional<EnvRequest> pending;
  std::optional<Outcome> outcome;
  std::uint64_t next_choice = 1;

  void commit(const State& s) {
    for (const auto& ev : events_of(s.events)) trace.push_back(detail::render(ev, s.subst));
  }

  std::optional<std::vector<Term>> domain_for(const std::string& var) const {
    if (auto it = options.domains.find(var); it != options.domains.end()) return it->second;
    if (const auto* d = program.domain(var)) return d->values;
    return std::nullopt;
  }

  EnvRequest make_request(const State& s) {
    const Request& r = *s.request;
    EnvRequest out;
    out.choice_id = next_choice++;
    Formula f = detail::resolve_in(s, r.f);
    if (f.is_quant()) {
      out.kind = EnvRequest::Kind::Value;
      out.variable = f.name();
      out.domain = domain_for(f.name());
      out.prompt = f.prompt().empty() ? "choose a value for " + f.name() : f.prompt();
    } else {
      out.kind = EnvRequest::Kind::Branch;
      out.options = {print_formula(f.lhs()), print_formula(f.rhs())};
      out.prompt = f.prompt().empty() ? "choose " + out.options[0] + " or " + out.options[1] : f.prompt();
    }
    out.snapshot = detail::snapshot(s);
    return out;
  }

  Outcome finish(const State& s, Status status, std::string diagnostic = {}) {
    Outcome o;
    o.status = status;
    for (const auto& [name, t] : s.bindings) o.bindings.emplace_back(name, detail::resolve_in(s, t));
    for (const auto& t : s.outputs) o.outputs.push_back(detail::resolve_in(s, t));
    o.final_store = detail::store_json(s);
    o.diagnostic = std::move(diagnostic);
    Ev e = detail::event(status == Status::Won ? "Succeed" : "Fail");
    if (status != Status::Won) e.fixed["reason"] = to_string(status);
    trace.push_back(detail::render(e, s.subst));
    trace.push_back(to_json(o));
    return o;
  }
};

Session::Session(const Program& program, const Formula& query, Options options)
    : impl_(std::make_unique<Impl>()) {
  impl_->program = program;
  impl_->options = std::move(options);
  State& s = impl_->state;
  for (const auto* agent : program.agents()) {
    std::vector<detail::AtomInst> produced;
    detail::load(s, program, agent->body, false, produced);
    if (!produced.empty()) {
      Ev e = detail::event("Assume");
      e.fixed["agent"] = agent->name;
      e.atoms.emplace_back("produced", produced);
      s.events = detail::push(s.events, std::move(e));
    }
  }
  s.goals.push_back({query, true});
}

Session::~Session() = default;
Session::Session(const Session& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
Session& Session::operator=(const Session& o) {
  if (this != &o) impl_ = std::make_unique<Impl>(*o.impl_);
  return *this;
}
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

std::variant<EnvRequest, Outcome> Session::run() {
  Impl& m = *impl_;
  if (m.outcome) return *m.outcome;
  if (m.pending) return *m.pending;

  detail::SegmentResult r;
  run_with_large_stack([&] { r = detail::run_segment(m.program, m.options, m.state, m.trace.size()); });

  if (!r.state) {
    if (r.status == Status::Lost && r.non_pattern)
      throw Error("non-pattern", "unification left the pattern fragment: " + r.detail);
    m.commit(m.state);
    m.state.events = nullptr;
    m.outcome = m.finish(m.state, r.status);
    return *m.outcome;
  }
  State& s = *r.state;
  m.commit(s);
  s.events = nullptr;
  if (s.request) {
    EnvRequest req = m.make_request(s);
    m.trace.push_back(to_json(req));
    m.state = std::move(s);
    m.pending = req;
    return req;
  }
  m.state = std::move(s);
  m.outcome = m.finish(m.state, Status::Won);
  return *m.outcome;
}

void Session::apply(const EnvMove& move) {
  Impl& m = *impl_;
  if (!m.pending) throw Error("stale-choice", "no environment request is pending");
  if (move.choice_id != m.pending->choice_id)
    throw Error("stale-choice", "choice " + std::to_string(move.choice_id) + " is not the pending request " +
                                    std::to_string(m.pending->choice_id));
  State& s = m.state;
  const Request r = *s.request;
  Formula f = detail::resolve_in(s, r.f);
  bool value_kind = r.what == Request::What::GoalValue || r.what == Request::What::ResourceValue;

  std::optional<Formula> next;
  if (value_kind) {
    const Term* t = std::get_if<Term>(&move.pick);
    if (!t) throw Error("bad-pick", "request " + std::to_string(move.choice_id) + " needs a value");
    Term v = normalize(*t);
    if (!v.ground() || !v.closed()) throw Error("non-ground-value", "value is not ground: " + to_string(v));
    if (const auto& dom = m.pending->domain;
        dom && std::none_of(dom->begin(), dom->end(), [&](const Term& d) { return alpha_eq(d, v); }))
      throw Error("out-of-domain", to_string(v) + " is outside the domain of " + m.pending->variable);
    next = instantiate(f.body(), v);
    m.trace.push_back(to_json(EnvMove{move.choice_id, v}));
  } else {
    const Side* side = std::get_if<Side>(&move.pick);
    if (!side) throw Error("bad-pick", "request " + std::to_string(move.choice_id) + " needs left or right");
    next = *side == Side::Left ? f.lhs() : f.rhs();
    m.trace.push_back(to_json(move));
  }

  if (r.what == Request::What::GoalBranch || r.what == Request::What::GoalValue) {
    s.goals.push_back({*next, r.flag});
  } else {
    std::vector<detail::AtomInst> produced;
    detail::load(s, m.program, *next, r.flag, produced);
    if (!produced.empty()) {
      Ev e = detail::event("Assume");
      e.formulas.emplace_back("formula", *next);
      e.atoms.emplace_back("produced", produced);
      s.events = detail::push(s.events, std::move(e));
    }
  }
  s.request.reset();
  s.fires = 0;
  s.depth = 0;
  m.pending.reset();
}

const std::optional<EnvRequest>& Session::pending() const { return impl_->pending; }
const std::optional<Outcome>& Session::outcome() const { return impl_->outcome; }
const std::vector<Json>& Session::trace() const { return impl_->trace; }

std::string Session::trace_text() const {
  std::string out;
  for (const auto& j : impl_->trace) out += j.dump() + "\n";
  return out;
}

// ---------------------------------------------------------------- verify / replay

namespace {

void explore(Session s, Verdict& v) {
  auto r = s.run();
  if (auto* o = std::get_if<Outcome>(&r)) {
    ++v.plays;
    if (o->status != Status::Won) v.winnable = false;
    v.outcomes.push_back(*o);
    return;
  }
  const auto& req = std::get<EnvRequest>(r);
  if (req.kind == EnvRequest::Kind::Branch) {
    for (Side side : {Side::Left, Side::Right}) {
      Session next = s;
      next.apply({req.choice_id, side});
      explore(std::move(next), v);
    }
    return;
  }
  if (!req.domain)
    throw Error("infinite-env-domain", "no finite domain for " + req.variable + "; declare one or pass --domain");
  for (const auto& value : *req.domain) {
    Session next = s;
    next.apply({req.choice_id, value});
    explore(std::move(next), v);
  }
}

}  // namespace

Verdict verify_winnable(const Program& program, const Formula& query, const Options& options) {
  Verdict v;
  v.winnable = true;
  explore(Session(program, query, options), v);
  return v;
}

Outcome replay(const Program& program, const Formula& query, const std::vector<Json>& trace, const Options& options) {
  auto diverge = [](std::size_t i, const std::string& why) -> Error {
    return Error("replay-divergence", "replay diverges at record " + std::to_string(i) + ": " + why);
  };
  Session s(program, query, options);
  while (true) {
    auto r = s.run();
    if (std::holds_alternative<Outcome>(r)) break;
    std::size_t i = s.trace().size();
    if (i >= trace.size() || trace[i].value("type", "") != "env_move")
      throw diverge(i, "the recorded trace has no environment move here");
    try {
      s.apply(env_move_from_json(trace[i]));
    } catch (const Error& e) {
      throw diverge(i, e.what());
    }
  }
  const auto& got = s.trace();
  for (std::size_t i = 0; i < std::max(got.size(), trace.size()); ++i) {
    if (i >= got.size() || i >= trace.size()) throw diverge(i, "traces differ in length");
    if (got[i].dump() != trace[i].dump()) throw diverge(i, "expected " + trace[i].dump() + ", got " + got[i].dump());
  }
  return *s.outcome();
}

}  // namespace clt
