#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "clt/stdlib.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "protocol.hpp"
#include "server.hpp"

using namespace clt;
using namespace clt::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("clt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path program(const std::string& name) { return fs::path(CLT_SOURCE_DIR) / "programs" / (name + ".clt"); }

struct Ran {
  int code;
  std::string out, err;
};

Ran run(RunArgs a) {
  std::ostringstream out, err;
  int code = cmd_run(a, out, err);
  return {code, out.str(), err.str()};
}

RunArgs run_args(const std::string& file, const std::string& query, const std::vector<std::string>& moves) {
  RunArgs a;
  a.file = file;
  a.query = query;
  std::string script;
  for (const auto& m : moves) script += m + "\n";
  a.moves = write("moves_" + std::to_string(std::hash<std::string>{}(file + query + script)), script).string();
  return a;
}

Ran repl(const std::string& file, const std::string& input, std::optional<std::string> trace_file = {},
         bool trace = false) {
  ReplArgs a;
  a.file = file;
  a.trace_file = std::move(trace_file);
  a.trace = trace;
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = cmd_repl(a, in, out, err);
  return {code, out.str(), err.str()};
}

// ---------------------------------------------------------------- sockets

class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    timeval tv{10, 0};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  }
  ~Client() { ::close(fd_); }

  void send(const Json& j) {
    std::string line = j.dump() + "\n";
    REQUIRE(::send(fd_, line.data(), line.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(line.size()));
  }

  // Next record, or nullopt once the server closes the connection.
  std::optional<Json> recv() {
    while (true) {
      auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return Json::parse(line);
      }
      char chunk[4096];
      ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) return std::nullopt;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  // Records up to and including the next env_request or result.
  std::vector<Json> until_stop() {
    std::vector<Json> out;
    while (auto r = recv()) {
      out.push_back(*r);
      std::string t = (*r)["type"];
      if (t == "env_request" || t == "result" || t == "error") break;
    }
    return out;
  }

 private:
  int fd_;
  std::string buf_;
};

std::string stream_text(const std::vector<Json>& rs) {
  std::string s;
  for (const auto& r : rs) s += r.dump() + "\n";
  return s;
}

// Plays a canonical query through the protocol handler, returning every
// record sent.
std::vector<std::string> protocol_play(const BundledProgram& bp, const CanonicalQuery& c) {
  ProtocolHandler h;
  std::vector<std::string> sent;
  auto feed = [&](const Json& j) {
    for (auto& r : h.handle(j.dump())) sent.push_back(r);
  };
  feed({{"type", "load"}, {"program", bp.source}});
  feed({{"type", "query"}, {"text", c.query}});
  for (const auto& m : c.moves) {
    auto last = Json::parse(sent.back());
    REQUIRE(last["type"] == "env_request");
    feed({{"type", "env_move"}, {"choice_id", last["choice_id"]}, {"pick", m}});
  }
  return sent;
}

int exit_of(const std::string& cmd) {
  int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("run: factorial with Y=5 prints the binding") {
  auto r = run(run_args(program("factorial").string(), "?- @Y.#Z.fac(Y,Z).", {"Y=5"}));
  CHECK(r.code == kWon);
  CHECK(r.out == "Won  Z = 120\n");
}

TEST_CASE("run: lottery left is won") {
  auto r = run(run_args(program("lottery").string(), "?- t.", {"left"}));
  CHECK(r.code == kWon);
  CHECK(r.out == "Won\n");
}

TEST_CASE("run: fastfood prints the outputs") {
  auto r = run(run_args(program("fastfood").string(), "?- c /\\ d.", {"5", "6"}));
  CHECK(r.code == kWon);
  CHECK(r.out == "Won\noutputs: m(ham), m(coke), m(2), m(fi), m(coke), m(2)\n");
}

TEST_CASE("run: missing, surplus and misnamed moves are errors") {
  auto missing = run(run_args(program("factorial").string(), "?- @Y.#Z.fac(Y,Z).", {}));
  CHECK(missing.code == kError);
  CHECK(missing.err.find("unanswered environment request") != std::string::npos);
  auto surplus = run(run_args(program("lottery").string(), "?- t.", {"left", "right"}));
  CHECK(surplus.code == kError);
  CHECK(surplus.err.find("surplus") != std::string::npos);
  auto named = run(run_args(program("factorial").string(), "?- @Y.#Z.fac(Y,Z).", {"Q=5"}));
  CHECK(named.code == kError);
  CHECK(named.err.find("asks for Y") != std::string::npos);
}

TEST_CASE("run: exit codes for lost, resource limit and parse errors") {
  auto lost = run(run_args(program("horn").string(), "?- pv(p(a), p(b)).", {}));
  CHECK(lost.code == kLost);
  CHECK(lost.out == "Lost\n");

  auto counter = write("counter.clt", "agent c = !(n(0) & @X. (n(X) -> n(X + 1))).\n");
  RunArgs a = run_args(counter.string(), "?- n(10).", {});
  a.max_fires = 3;
  auto limited = run(a);
  CHECK(limited.code == kResourceLimit);
  CHECK(limited.out.rfind("ResourceLimit", 0) == 0);

  auto bad = write("bad.clt", "agent a = p( .\n");
  auto parse = run(run_args(bad.string(), "?- p.", {}));
  CHECK(parse.code == kError);
  CHECK(parse.err.find("1:14") != std::string::npos);

  auto no_file = run(run_args((scratch() / "absent.clt").string(), "?- p.", {}));
  CHECK(no_file.code == kError);
}

TEST_CASE("run: CLT_MAX_FIRES overrides the default and --max-fires overrides it") {
  auto counter = write("counter2.clt", "agent c = !(n(0) & @X. (n(X) -> n(X + 1))).\n");
  ::setenv("CLT_MAX_FIRES", "3", 1);
  CHECK(run(run_args(counter.string(), "?- n(5).", {})).code == kResourceLimit);
  RunArgs a = run_args(counter.string(), "?- n(5).", {});
  a.max_fires = 10;
  CHECK(run(a).code == kWon);
  ::unsetenv("CLT_MAX_FIRES");
  CHECK(run(run_args(counter.string(), "?- n(5).", {})).code == kWon);
}

TEST_CASE("run: a bundled name stands in for a missing file") {
  auto r = run(run_args("lottery.clt", "?- t.", {"right"}));
  CHECK(r.code == kWon);
}

TEST_CASE("run: the trace file equals the golden trace") {
  for (const auto& bp : bundled_programs())
    for (const auto& c : bp.canonical) {
      RunArgs a = run_args(program(bp.name).string(), c.query, c.moves);
      a.trace = (scratch() / (c.golden + ".trace")).string();
      auto r = run(a);
      CHECK(r.code == exit_code(c.expected));
      CHECK(read(*a.trace) == read(fs::path(CLT_SOURCE_DIR) / "golden" / (c.golden + ".trace")));
    }
}

TEST_CASE("repl: lottery prompt, options and a pick") {
  auto r = repl(program("lottery").string(), "?- t.\nleft\n:quit\n");
  CHECK(r.code == 0);
  CHECK(r.out.find("how much is the final value?") != std::string::npos);
  CHECK(r.out.find("left:  v(0)") != std::string::npos);
  CHECK(r.out.find("right: v(1000000)") != std::string::npos);
  CHECK(r.out.find("Won") != std::string::npos);
}

TEST_CASE("repl: fastfood asks for X and re-prompts on bad input") {
  auto r = repl(program("fastfood").string(), "?- c /\\ d.\nX\nleft\n5\n6\n:quit\n");
  CHECK(r.code == 0);
  CHECK(r.out.find("choose a value for X") != std::string::npos);
  CHECK(r.out.find("invalid:") != std::string::npos);
  CHECK(r.out.find("outputs: m(ham), m(coke), m(2)") != std::string::npos);
}

TEST_CASE("repl: :quit exits cleanly, even mid-request") {
  CHECK(repl(program("lottery").string(), ":quit\n").code == 0);
  auto r = repl(program("lottery").string(), "?- t.\n:quit\n");
  CHECK(r.code == 0);
  CHECK(r.out.find("Won") == std::string::npos);
}

TEST_CASE("repl: --trace prints events") {
  auto r = repl(program("lottery").string(), "?- t.\nleft\n", {}, true);
  CHECK(r.out.find("\"event\":\"ChooseLeft\"") != std::string::npos);
}

TEST_CASE("repl: query errors are reported and the loop goes on") {
  auto r = repl(program("lottery").string(), "?- (t.\n?- t.\nright\n");
  CHECK(r.out.find("error: parse") != std::string::npos);
  CHECK(r.out.find("Won") != std::string::npos);
}

TEST_CASE("batch and interactive play give identical traces") {
  for (const auto& bp : bundled_programs())
    for (const auto& c : bp.canonical) {
      RunArgs a = run_args(program(bp.name).string(), c.query, c.moves);
      a.trace = (scratch() / ("batch_" + c.golden)).string();
      run(a);
      std::string input = c.query + "\n";
      for (const auto& m : c.moves) input += m + "\n";
      input += ":quit\n";
      auto tf = (scratch() / ("repl_" + c.golden)).string();
      repl(program(bp.name).string(), input, tf);
      CHECK(read(tf) == read(*a.trace));
    }
}

TEST_CASE("verify: reports and exit codes") {
  std::ostringstream out, err;
  VerifyArgs v;
  v.file = program("lottery").string();
  v.query = "?- t.";
  CHECK(cmd_verify(v, out, err) == 0);
  CHECK(out.str() == "winnable: true (2 plays)\n");

  VerifyArgs f;
  f.file = program("factorial").string();
  f.query = "?- @Y.#Z.fac(Y,Z).";
  f.domains = {"Y=0,1,2,3"};
  out.str("");
  CHECK(cmd_verify(f, out, err) == 0);
  CHECK(out.str() == "winnable: true (4 plays)\n");

  f.domains.clear();
  err.str("");
  CHECK(cmd_verify(f, out, err) == kError);
  CHECK(err.str().find("infinite-env-domain") != std::string::npos);

  VerifyArgs u;
  u.file = write("u.clt", "agent u = v(0) | v(1).\n").string();
  u.query = "?- v(0).";
  out.str("");
  CHECK(cmd_verify(u, out, err) == kLost);
  CHECK(out.str() == "winnable: false (2 plays)\n");
}

TEST_CASE("protocol: lottery request, pick and result") {
  ProtocolHandler h;
  CHECK(h.handle(Json{{"type", "load"}, {"program", bundled("lottery").source}}.dump()).empty());
  auto first = h.handle(Json{{"type", "query"}, {"text", "?- t."}}.dump());
  REQUIRE(first.size() == 1);
  auto req = Json::parse(first[0]);
  CHECK(req["type"] == "env_request");
  CHECK(req["choice_id"] == 1);
  CHECK(req["kind"] == "branch");
  CHECK(req["options"] == Json::array({"v(0)", "v(1000000)"}));
  CHECK(req["prompt"] == "how much is the final value?");
  CHECK(req.contains("snapshot"));

  auto stale = h.handle(Json{{"type", "env_move"}, {"choice_id", 2}, {"pick", "left"}}.dump());
  REQUIRE(stale.size() == 1);
  CHECK(Json::parse(stale[0])["code"] == "stale-choice");
  CHECK_FALSE(h.closed());

  auto rest = h.handle(Json{{"type", "env_move"}, {"choice_id", 1}, {"pick", "left"}}.dump());
  REQUIRE(rest.size() > 2);
  CHECK(Json::parse(rest.front())["type"] == "env_move");
  CHECK(Json::parse(rest[1])["type"] == "event");
  auto result = Json::parse(rest.back());
  CHECK(result["type"] == "result");
  CHECK(result["status"] == "won");
  CHECK(result.contains("bindings"));
  CHECK(result.contains("outputs"));

  auto again = h.handle(Json{{"type", "env_move"}, {"choice_id", 1}, {"pick", "left"}}.dump());
  CHECK(Json::parse(again.at(0))["code"] == "stale-choice");
}

TEST_CASE("protocol: parse errors carry line and column and keep the connection") {
  ProtocolHandler h;
  auto r = h.handle(Json{{"type", "load"}, {"program", "agent a = p( ."}}.dump());
  REQUIRE(r.size() == 1);
  auto e = Json::parse(r[0]);
  CHECK(e["code"] == "parse");
  CHECK(e["line"] == 1);
  CHECK(e["column"] == 14);
  CHECK_FALSE(h.closed());
}

TEST_CASE("protocol: malformed records close the connection") {
  for (std::string bad : {"{not json", "[1,2]", R"({"type":"dance"})", R"({"type":"query"})",
                          R"({"type":"load","program":3})"}) {
    ProtocolHandler h;
    auto r = h.handle(bad);
    REQUIRE(r.size() == 1);
    CHECK(Json::parse(r[0])["code"] == "malformed");
    CHECK(h.closed());
    CHECK(h.handle(R"({"type":"query","text":"?- p."})").empty());
  }
}

TEST_CASE("protocol: session errors come back as results") {
  ProtocolHandler h;
  h.handle(Json{{"type", "load"}, {"program", "agent c = (p(1) -> q(1) | q(2))."}}.dump());
  auto r = h.handle(Json{{"type", "query"}, {"text", "?- q(1)."}}.dump());
  REQUIRE(!r.empty());
  auto res = Json::parse(r.back());
  CHECK(res["type"] == "result");
  CHECK(res["status"] == "error");
  CHECK(res["code"] == "rule-consequent");
  CHECK_FALSE(h.closed());
}

TEST_CASE("protocol: query limits apply") {
  ProtocolHandler h;
  h.handle(Json{{"type", "load"}, {"program", "agent c = !(n(0) & @X. (n(X) -> n(X + 1)))."}}.dump());
  auto r = h.handle(Json{{"type", "query"}, {"text", "?- n(5)."}, {"limits", {{"max_fires", 2}}}}.dump());
  CHECK(Json::parse(r.back())["status"] == "resource-limit");
}

TEST_CASE("protocol: the record stream equals the trace file") {
  for (const auto& bp : bundled_programs())
    for (const auto& c : bp.canonical) {
      std::string text;
      for (const auto& r : protocol_play(bp, c)) text += r + "\n";
      CHECK(text == read(fs::path(CLT_SOURCE_DIR) / "golden" / (c.golden + ".trace")));
    }
}

TEST_CASE("serve: sessions over TCP are independent and stay responsive") {
  Server server(0);
  std::thread t([&] { server.serve(); });

  Client a(server.port());
  a.send({{"type", "load"}, {"program", bundled("lottery").source}});
  a.send({{"type", "query"}, {"text", "?- t."}});
  auto first = a.until_stop();
  REQUIRE(!first.empty());
  CHECK(first.back()["type"] == "env_request");

  // A second connection is served while the first waits for its human.
  {
    Client b(server.port());
    b.send({{"type", "load"}, {"program", bundled("horn").source}});
    b.send({{"type", "query"}, {"text", "?- pv(p(a), some(\\x. p(x)))."}});
    auto res = b.until_stop();
    REQUIRE(!res.empty());
    CHECK(res.back()["status"] == "won");
  }

  a.send({{"type", "env_move"}, {"choice_id", 1}, {"pick", "left"}});
  auto rest = a.until_stop();
  REQUIRE(!rest.empty());
  CHECK(rest.back()["status"] == "won");
  first.insert(first.end(), rest.begin(), rest.end());
  CHECK(stream_text(first) == read(fs::path(CLT_SOURCE_DIR) / "golden" / "lottery_left.trace"));

  Client c(server.port());
  c.send(Json("garbage"));
  auto err = c.recv();
  REQUIRE(err);
  CHECK((*err)["code"] == "malformed");
  CHECK_FALSE(c.recv());

  server.stop();
  t.join();
}

TEST_CASE("binary: exit codes are disjoint") {
  const std::string bin = CLT_BIN;
  auto moves = [](const std::string& name, const std::string& text) { return write(name, text).string(); };
  const std::string fac = program("factorial").string();
  CHECK(exit_of(bin + " run " + fac + " --query '?- @Y.#Z.fac(Y,Z).' --moves " + moves("m5", "Y=5\n")) == 0);
  CHECK(exit_of(bin + " run " + program("horn").string() + " --query '?- pv(p(a), p(b)).'") == 1);
  CHECK(exit_of(bin + " run " + write("n.clt", "agent c = !(n(0) & @X. (n(X) -> n(X + 1))).\n").string() +
                " --query '?- n(9).' --max-fires 2") == 2);
  CHECK(exit_of(bin + " run " + fac + " --query '?- @Y.#Z.fac(Y,Z).' --moves " + moves("m0", "")) == 3);
  CHECK(exit_of(bin + " run") == 3);
  CHECK(exit_of(bin + " frobnicate") == 3);
  CHECK(exit_of(bin + " verify " + program("lottery").string()) == 0);
  CHECK(exit_of(bin + " verify " + fac) == 3);
  CHECK(exit_of(bin + " --help") == 0);
}
