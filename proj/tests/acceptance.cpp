// One PASS/FAIL line per acceptance criterion. Tolerances and time limits
// are fixed here; the property suites are the doctest cases compiled in
// alongside, selected by name.

#define DOCTEST_CONFIG_IMPLEMENT
#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "doctest.h"
#include "horn_corpus.hpp"
#include "play.hpp"

using namespace clt;
using namespace clt::testing;

namespace {

const std::string kFactQuery = "?- @Y.#Z.fac(Y,Z).";

struct Check {
  bool ok;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_ms, const std::function<Check()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Check v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  bool ok = v.ok && ms < limit_ms;
  if (!ok) ++failures;
  std::printf("%s  %-24s %s  (%.0f ms, limit %.0f ms)\n", ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), ms,
              limit_ms);
  std::fflush(stdout);
}

std::string factorial(int n) {
  boost::multiprecision::cpp_int acc = 1;
  for (int i = 2; i <= n; ++i) acc *= i;
  return acc.str();
}

std::string outputs(const Outcome& o) {
  std::string s;
  for (const auto& t : o.outputs) s += (s.empty() ? "" : " ") + to_string(t);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  criterion("factorial-reproduction", 1000, [] {
    auto p = play(load_bundled("factorial"), kFactQuery, {"5"});
    auto fires = events(p.session.trace(), "ForwardFire");
    std::string text = p.session.trace_text();
    bool seen = text.find("\"atom\":\"fac(1, 1)\"") != std::string::npos &&
                text.find("\"atom\":\"fac(2, 2)\"") != std::string::npos;
    bool ok = p.outcome.status == Status::Won && binding(p.outcome, "Z") == "120" && fires.size() == 5 && seen;
    return Check{ok, "Z = " + binding(p.outcome, "Z") + ", " + std::to_string(fires.size()) +
                           " ForwardFire, fac(1,1)/fac(2,2) " + (seen ? "seen" : "missing")};
  });

  criterion("factorial-oracle-sweep", 2000, [] {
    int good = 0;
    for (int n = 0; n <= 8; ++n) {
      auto p = play(load_bundled("factorial"), kFactQuery, {std::to_string(n)});
      if (p.outcome.status == Status::Won && binding(p.outcome, "Z") == factorial(n)) ++good;
    }
    return Check{good == 9, std::to_string(good) + "/9 of Y = 0..8 exact"};
  });

  criterion("lottery", 1000, [] {
    Program prog = load_bundled("lottery");
    auto l = play(prog, "?- t.", {"left"});
    auto r = play(prog, "?- t.", {"right"});
    auto v = verify_winnable(prog, parse_query("?- t.", prog));
    bool ok = l.outcome.status == Status::Won && r.outcome.status == Status::Won && v.winnable && v.plays == 2;
    return Check{ok, std::string("left ") + to_string(l.outcome.status) + ", right " + to_string(r.outcome.status) +
                           ", winnable " + (v.winnable ? "true" : "false") + " (" + std::to_string(v.plays) + " plays)"};
  });

  criterion("fastfood", 1000, [] {
    Program prog = load_bundled("fastfood");
    auto a = play(prog, "?- c /\\ d.", {"5", "6"});
    auto b = play(prog, "?- c /\\ d.", {"2", "4"});
    bool ok = a.outcome.status == Status::Won && outputs(a.outcome) == "m(ham) m(coke) m(2) m(fi) m(coke) m(2)" &&
              b.outcome.status == Status::Won && outputs(b.outcome) == "m(fi) m(coke) m(0)";
    return Check{ok, "5,6 -> [" + outputs(a.outcome) + "]; 2,4 -> [" + outputs(b.outcome) + "]"};
  });

  criterion("horn-prover", 1000, [] {
    auto p = play(load_bundled("horn"), "?- pv(p(a), some(\\x. p(x))).", {});
    bool seen = p.session.trace_text().find("\"goal\":\"pv(p(a), p(a))\"") != std::string::npos;
    return Check{p.outcome.status == Status::Won && seen,
                   std::string(to_string(p.outcome.status)) + ", pv(p(a), p(a)) " + (seen ? "seen" : "missing")};
  });

  criterion("oracle-equivalence", 60000, [] {
    HornGen gen(7);
    auto corpus = gen.stratified(200);
    Program prog = load_bundled("horn");
    std::size_t agree = 0, limits = 0;
    for (const auto& c : corpus) {
      auto p = play(prog, "?- pv(" + c.d + ", " + c.g + ").", {});
      if (p.outcome.status == Status::ResourceLimit)
        ++limits;
      else if ((p.outcome.status == Status::Won) == c.provable)
        ++agree;
    }
    std::size_t decided = corpus.size() - limits;
    bool ok = agree == decided && limits * 20 < corpus.size();
    return Check{ok, std::to_string(agree) + "/" + std::to_string(decided) + " agree, " + std::to_string(limits) +
                           "/" + std::to_string(corpus.size()) + " resource-limit"};
  });

  criterion("property-suites", 60000, [&] {
    doctest::Context ctx(argc, argv);
    ctx.setOption("test-case", "property:*,golden:*,subst stays idempotent");
    ctx.setOption("no-intro", true);
    ctx.setOption("minimal", true);
    int rc = ctx.run();
    return Check{rc == 0, rc == 0 ? "round-trip, normalize, unify, linearity, replay, env commitment green"
                                    : "doctest reported failures"};
  });

  return failures == 0 ? 0 : 1;
}
