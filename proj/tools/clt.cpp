#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "server.hpp"

using namespace clt::cli;

namespace {

void common_flags(CLI::App* app, CommonArgs& a) {
  app->add_option("file", a.file, "program file or bundled program name")->required();
  app->add_option("--query", a.query, "query to play, e.g. '?- t.' (default: the file's first ?- line)");
  app->add_option("--max-fires", a.max_fires, "forward firings allowed between environment moves");
  app->add_option("--max-depth", a.max_depth, "search steps allowed between environment moves");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clt: play computability-logic queries against agent programs"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "play one query with scripted environment moves");
  common_flags(run_cmd, run);
  run_cmd->add_option("--moves", run.moves, "move script: one move per line (left, right, a term, X = term)");
  run_cmd->add_option("--trace", run.trace, "write the trace records to this file");

  ReplArgs repl;
  auto* repl_cmd = app.add_subcommand("repl", "read queries and answer environment requests interactively");
  common_flags(repl_cmd, repl);
  repl_cmd->remove_option(repl_cmd->get_option("--query"));
  repl_cmd->add_flag("--trace", repl.trace, "print events as they happen");
  repl_cmd->add_option("--trace-file", repl.trace_file, "write the latest query's trace to this file");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "enumerate every environment play and report winnability");
  common_flags(verify_cmd, verify);
  verify_cmd->add_option("--domain", verify.domains, "finite domain for a value request, e.g. 'Y=0,1,2,3'");

  std::uint16_t port = 7171;
  auto* serve_cmd = app.add_subcommand("serve", "serve the session protocol over TCP on 127.0.0.1");
  serve_cmd->add_option("--port", port, "port to listen on (0 picks one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
  if (*repl_cmd) return cmd_repl(repl, std::cin, std::cout, std::cerr);
  if (*verify_cmd) return cmd_verify(verify, std::cout, std::cerr);
  try {
    Server server(port, options_for(CommonArgs{}));
    std::cout << "listening on " << server.port() << std::endl;
    server.serve();
  } catch (const clt::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return kError;
  }
  return 0;
}
