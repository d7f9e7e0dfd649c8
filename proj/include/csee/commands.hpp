#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "csee/compiler.hpp"
#include "csee/fd/solver.hpp"
#include "csee/session.hpp"
#include "csee/workbook.hpp"

namespace csee {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kInvalid = 2;
inline constexpr int kBudget = 4;
}  // namespace exit_code

/// "solution 3: A1=0 B1=1 ..." over the variable cells in labeling order.
inline std::string format_solution_line(const CompiledModel& cm, const fd::Solution& s,
                                        std::size_t index) {
  std::string line = "solution " + std::to_string(index) + ":";
  for (CellRef cell : cm.var_cells) {
    line += ' ';
    line += format_cell_ref(cell);
    line += '=';
    line += std::to_string(s[cm.cell_to_var.at(cell)]);
  }
  return line;
}

namespace detail {

inline bool load_for_command(const std::filesystem::path& path, Workbook& wb, std::ostream& err) {
  try {
    wb = load_workbook(path);
    return true;
  } catch (const WorkbookError& e) {
    for (const auto& m : e.messages()) err << "error: " << m << '\n';
    for (const auto& c : e.cell_errors()) {
      err << format_cell_ref(c.cell()) << ": ParseError: " << c.detail() << " (at position "
          << c.position() << ")\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  }
  return false;
}

inline void print_compile_errors(const std::vector<CompileError>& errors, std::ostream& err) {
  for (const auto& e : errors) err << format_error(e) << '\n';
}

}  // namespace detail

/// Parses and compiles without solving.
inline int cmd_check(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  Workbook wb;
  if (!detail::load_for_command(path, wb, err)) return exit_code::kInvalid;
  try {
    CompiledModel cm = compile(wb);
    for (const auto& d : cm.diagnostics) err << "warning: " << d << '\n';
    out << "ok: " << cm.var_cells.size() << " variables, " << cm.constraint_cells.size()
        << " constraint cells, " << cm.model.constraints().size() << " solver constraints\n";
    return exit_code::kOk;
  } catch (const CompileFailure& e) {
    detail::print_compile_errors(e.errors(), err);
  } catch (const fd::ModelError& e) {
    err << "error: " << e.what() << '\n';
  }
  return exit_code::kInvalid;
}

struct SolveCommand {
  std::filesystem::path input;
  std::size_t solution = 0;
  bool count = false;
  bool all = false;
  std::optional<std::uint64_t> limit;
  std::uint64_t budget = fd::kDefaultNodeBudget;
  std::optional<std::filesystem::path> output;
  bool propagate_only = false;
};

namespace detail {

inline int propagate_only(const Workbook& wb, std::ostream& out, std::ostream& err) {
  CompiledModel cm;
  try {
    cm = compile(wb);
  } catch (const CompileFailure& e) {
    print_compile_errors(e.errors(), err);
    return exit_code::kInvalid;
  }
  auto doms = fd::propagate(cm.model);
  if (!doms) {
    out << "status: Failure\n";
    return exit_code::kOk;
  }
  out << "status: Consistent\n";
  for (CellRef cell : cm.var_cells) {
    out << format_cell_ref(cell) << " in " << (*doms)[cm.cell_to_var.at(cell).index].to_string()
        << '\n';
  }
  return exit_code::kOk;
}

}  // namespace detail

/// Solves a workbook file. Output is deterministic: timing goes to `err`.
inline int cmd_solve(const SolveCommand& cmd, std::ostream& out, std::ostream& err) {
  Workbook wb;
  if (!detail::load_for_command(cmd.input, wb, err)) return exit_code::kInvalid;
  if (cmd.propagate_only) return detail::propagate_only(wb, out, err);

  SolveSession session(wb);
  SolveOptions opts;
  opts.node_budget = cmd.budget;
  if (cmd.count || (cmd.all && !cmd.limit)) {
    opts.limit.reset();
  } else if (cmd.all) {
    opts.limit = cmd.limit;
  } else {
    opts.limit = cmd.solution + 1;
  }
  const SolveReport report = session.solve(opts);
  err << "elapsed: " << report.elapsed.count() << " ms, nodes: " << report.nodes << '\n';

  if (report.status == SolveStatus::Error) {
    if (!report.errors.empty()) {
      detail::print_compile_errors(report.errors, err);
    } else {
      err << "error: " << report.error << '\n';
    }
    return exit_code::kInvalid;
  }
  if (report.status == SolveStatus::BudgetExceeded) {
    if (cmd.count) {
      out << "at least 0\n";
      err << report.error << '\n';
      return exit_code::kBudget;
    }
    out << "status: BudgetExceeded\n";
    err << report.error << '\n';
    return exit_code::kBudget;
  }

  const bool budget_hit = !report.exhausted && report.count < opts.limit.value_or(UINT64_MAX);

  if (cmd.count) {
    if (budget_hit) {
      out << "at least " << report.count << '\n';
      err << report.error << '\n';
      return exit_code::kBudget;
    }
    out << report.count << '\n';
    return exit_code::kOk;
  }

  out << "status: " << to_string(report.status) << '\n';
  if (report.objective) out << "objective: " << *report.objective << '\n';
  if (report.status == SolveStatus::Unsat) {
    out << "solutions: 0\n";
    return exit_code::kOk;
  }

  const CompiledModel& cm = *session.compiled();
  if (cmd.all) {
    for (std::size_t i = 0; i < session.cached(); ++i) {
      out << format_solution_line(cm, session.solution(i), i) << '\n';
    }
    if (budget_hit) {
      err << report.error << '\n';
      return exit_code::kBudget;
    }
  } else {
    if (cmd.solution >= session.cached()) {
      if (budget_hit) {
        err << report.error << '\n';
        return exit_code::kBudget;
      }
      err << "error: solution index " << cmd.solution << " out of range (" << session.cached()
          << " solutions)\n";
      return exit_code::kUsage;
    }
    out << format_solution_line(cm, session.solution(cmd.solution), cmd.solution) << '\n';
  }

  if (cmd.output) {
    const std::size_t pick = cmd.all ? 0 : cmd.solution;
    try {
      save_workbook(session.goto_solution(pick), *cmd.output);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return exit_code::kInvalid;
    }
  }
  return exit_code::kOk;
}

}  // namespace csee
