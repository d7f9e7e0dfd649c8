#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "csee/commands.hpp"
#include "csee/service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Constraint spreadsheet engine: check, solve and serve SSCL workbooks"};
  app.require_subcommand(1);

  std::string check_path;
  auto* check = app.add_subcommand("check", "Parse and compile a workbook without solving");
  check->add_option("workbook", check_path, "Workbook JSON file")->required();

  csee::SolveCommand solve_cmd;
  std::string solve_path, output_path;
  std::uint64_t limit = 0;
  auto* solve = app.add_subcommand("solve", "Solve, enumerate or optimize a workbook");
  solve->add_option("workbook", solve_path, "Workbook JSON file")->required();
  solve->add_option("--solution", solve_cmd.solution, "0-based solution index")->default_val(0);
  auto* count = solve->add_flag("--count", solve_cmd.count, "Print the exact number of solutions");
  auto* all = solve->add_flag("--all", solve_cmd.all, "List solutions");
  auto* limit_opt = solve->add_option("--limit", limit, "Maximum solutions listed by --all");
  solve->add_option("--budget", solve_cmd.budget, "Search node budget")
      ->default_val(csee::fd::kDefaultNodeBudget);
  solve->add_option("-o,--output", output_path, "Write the solved workbook JSON here");
  solve->add_flag("--propagate-only", solve_cmd.propagate_only,
                  "Print variable domains after root propagation");
  count->excludes(all);
  limit_opt->needs(all);

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "Port to listen on")->default_val(8080);
  serve->add_option("--host", host, "Address to bind")->default_val("127.0.0.1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : csee::exit_code::kUsage;
  }

  if (*check) return csee::cmd_check(check_path, std::cout, std::cerr);
  if (*solve) {
    solve_cmd.input = solve_path;
    if (*limit_opt) solve_cmd.limit = limit;
    if (!output_path.empty()) solve_cmd.output = output_path;
    return csee::cmd_solve(solve_cmd, std::cout, std::cerr);
  }
  if (*serve) {
    std::cerr << "listening on " << host << ":" << port << '\n';
    return csee::service::serve(host, port) ? 0 : csee::exit_code::kUsage;
  }
  return csee::exit_code::kUsage;
}
