#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "csee/cell_ref.hpp"
#include "csee/fd/model.hpp"
#include "csee/range_expand.hpp"
#include "csee/sscl_ast.hpp"
#include "csee/workbook.hpp"

namespace csee {

struct CompileError {
  enum class Kind {
    MissingVarRange,
    MissingConstraintRange,
    DuplicateRangeDecl,
    UndomainedVariable,
    LengthMismatch,
    MultipleObjectives,
    NonConstraintInConstraintRange,
    UnknownCellReference,
    FormulaInVariableCell,
    ArithmeticOverflow,
  };

  Kind kind;
  CellRef cell;
  std::string message;
};

inline std::string_view to_string(CompileError::Kind k) {
  using K = CompileError::Kind;
  switch (k) {
    case K::MissingVarRange: return "MissingVarRange";
    case K::MissingConstraintRange: return "MissingConstraintRange";
    case K::DuplicateRangeDecl: return "DuplicateRangeDecl";
    case K::UndomainedVariable: return "UndomainedVariable";
    case K::LengthMismatch: return "LengthMismatch";
    case K::MultipleObjectives: return "MultipleObjectives";
    case K::NonConstraintInConstraintRange: return "NonConstraintInConstraintRange";
    case K::UnknownCellReference: return "UnknownCellReference";
    case K::FormulaInVariableCell: return "FormulaInVariableCell";
    case K::ArithmeticOverflow: return "ArithmeticOverflow";
  }
  return "?";
}

/// "J4: MissingVarRange: message"
inline std::string format_error(const CompileError& e) {
  return format_cell_ref(e.cell) + ": " + std::string(to_string(e.kind)) + ": " + e.message;
}

class CompileFailure : public Error {
 public:
  explicit CompileFailure(std::vector<CompileError> errors)
      : Error(errors.empty() ? "compilation failed" : format_error(errors.front())),
        errors_(std::move(errors)) {}
  const std::vector<CompileError>& errors() const noexcept { return errors_; }

 private:
  std::vector<CompileError> errors_;
};

struct DeclaredRanges {
  RangeList var_range;
  CellRef var_decl;
  RangeList constraint_range;
  CellRef constraint_decl;
};

struct CompiledModel {
  fd::Model model;
  std::map<CellRef, fd::VarId> cell_to_var;
  /// Variable cells in labeling order.
  std::vector<CellRef> var_cells;
  /// Constraint-range cells holding formulas.
  std::vector<CellRef> constraint_cells;
  DeclaredRanges ranges;
  std::optional<CellRef> objective_cell;
  std::vector<std::string> diagnostics;
};

/// Finds the single ssVarRange and single ssConstraintRange anywhere in
/// the workbook.
inline DeclaredRanges collect_ranges(const Workbook& wb) {
  using K = CompileError::Kind;
  std::optional<std::pair<CellRef, RangeList>> vars, cons;
  std::vector<CompileError> errors;
  for (const auto& [ref, cell] : wb.cells()) {
    const auto* f = std::get_if<Formula>(&cell.content);
    if (!f) continue;
    if (const auto* v = std::get_if<sscl::VarRange>(&f->ast)) {
      if (vars) {
        errors.push_back({K::DuplicateRangeDecl, ref,
                          "ssVarRange already declared in " + format_cell_ref(vars->first)});
      } else {
        vars.emplace(ref, v->range);
      }
    } else if (const auto* c = std::get_if<sscl::ConstraintRange>(&f->ast)) {
      if (cons) {
        errors.push_back({K::DuplicateRangeDecl, ref,
                          "ssConstraintRange already declared in " + format_cell_ref(cons->first)});
      } else {
        cons.emplace(ref, c->range);
      }
    }
  }
  if (!vars) errors.push_back({K::MissingVarRange, CellRef{1, 1}, "no ssVarRange declaration"});
  if (!cons) {
    errors.push_back({K::MissingConstraintRange, CellRef{1, 1}, "no ssConstraintRange declaration"});
  }
  if (!errors.empty()) throw CompileFailure(std::move(errors));
  return DeclaredRanges{vars->second, vars->first, cons->second, cons->first};
}

namespace detail {

class Lowering {
 public:
  using K = CompileError::Kind;

  explicit Lowering(const Workbook& wb) : wb_(wb) {}

  CompiledModel run() {
    cm_.ranges = collect_ranges(wb_);
    auto pending = declare_variables();
    auto formulas = gather_constraints();

    for (const auto& [cell, ast] : formulas) {
      if (const auto* d = std::get_if<sscl::Domain>(ast)) apply_domain(cell, *d, pending);
    }
    for (const auto& cell : cm_.var_cells) {
      if (!pending.at(cell)) {
        error(K::UndomainedVariable, cell, "variable cell has no domain");
      } else if (pending.at(cell)->empty()) {
        // Contradictory domains are kept as an unsatisfiable model rather
        // than rejected: the solver reports Unsat.
        cm_.diagnostics.push_back(format_cell_ref(cell) + ": domain is empty after intersection");
      }
    }
    if (!errors_.empty()) throw CompileFailure(std::move(errors_));

    for (const auto& cell : cm_.var_cells) {
      fd::Domain d = *pending.at(cell);
      bool empty = d.empty();
      fd::VarId v;
      try {
        v = cm_.model.new_var(empty ? fd::Domain::singleton(0) : std::move(d),
                              format_cell_ref(cell));
      } catch (const fd::ModelError& e) {
        error(K::ArithmeticOverflow, cell, e.what());
        continue;
      }
      if (empty) cm_.model.post(fd::LinearRel{{}, RelOp::Neq, 0});
      cm_.cell_to_var.emplace(cell, v);
      cm_.model.label_order.push_back(v);
    }
    if (!errors_.empty()) throw CompileFailure(std::move(errors_));

    for (const auto& [cell, ast] : formulas) {
      try {
        lower(cell, *ast);
      } catch (const CompileError& e) {
        errors_.push_back(e);
      } catch (const fd::ModelError& e) {
        errors_.push_back({K::ArithmeticOverflow, cell, e.what()});
      }
    }
    if (!errors_.empty()) throw CompileFailure(std::move(errors_));
    return std::move(cm_);
  }

 private:
  using Pending = std::map<CellRef, std::optional<fd::Domain>>;

  void error(K kind, CellRef cell, std::string message) {
    errors_.push_back({kind, cell, std::move(message)});
  }

  Pending declare_variables() {
    Pending pending;
    for (CellRef cell : var_list(cm_.ranges.var_range)) {
      if (pending.count(cell)) {
        cm_.diagnostics.push_back(format_cell_ref(cell) +
                                  ": listed more than once in ssVarRange; first occurrence kept");
        continue;
      }
      cm_.var_cells.push_back(cell);
      const CellContent& content = wb_.content(cell);
      std::optional<fd::Domain> dom;
      if (const auto* iv = std::get_if<IntValue>(&content)) {
        dom = fd::Domain::singleton(iv->value);
      } else if (const auto* dl = std::get_if<DomainLiteral>(&content)) {
        dom = fd::Domain::from_spec(dl->dom);
      } else if (std::holds_alternative<Formula>(content)) {
        error(K::FormulaInVariableCell, cell, "variable cells cannot hold constraints");
      }
      pending.emplace(cell, std::move(dom));
    }
    return pending;
  }

  std::vector<std::pair<CellRef, const sscl::Constraint*>> gather_constraints() {
    std::vector<std::pair<CellRef, const sscl::Constraint*>> out;
    std::set<CellRef> seen;
    for (CellRef cell : var_list(cm_.ranges.constraint_range)) {
      if (!seen.insert(cell).second) continue;
      const CellContent& content = wb_.content(cell);
      if (std::holds_alternative<EmptyCell>(content)) continue;
      if (const auto* f = std::get_if<Formula>(&content)) {
        cm_.constraint_cells.push_back(cell);
        out.emplace_back(cell, &f->ast);
      } else if (!std::count(cm_.var_cells.begin(), cm_.var_cells.end(), cell)) {
        error(K::NonConstraintInConstraintRange, cell,
              "constraint range cell holds a value, not a constraint");
      }
    }
    return out;
  }

  void apply_domain(CellRef origin, const sscl::Domain& d, Pending& pending) {
    const fd::Domain dom = fd::Domain::from_spec(d.dom);
    for (CellRef target : var_list(d.range)) {
      auto it = pending.find(target);
      if (it == pending.end()) {
        error(K::UnknownCellReference, origin,
              "ssDomain target " + format_cell_ref(target) + " is not a variable cell");
        continue;
      }
      if (!it->second) {
        it->second = dom;
      } else {
        it->second->intersect(dom);
      }
    }
  }

  [[noreturn]] void fail(K kind, CellRef cell, std::string message) {
    throw CompileError{kind, cell, std::move(message)};
  }

  fd::Operand resolve(CellRef origin, CellRef ref) {
    if (auto it = cm_.cell_to_var.find(ref); it != cm_.cell_to_var.end()) return it->second;
    if (const auto* iv = std::get_if<IntValue>(&wb_.content(ref))) return iv->value;
    fail(K::UnknownCellReference, origin,
         format_cell_ref(ref) + " is neither a variable cell nor an integer cell");
  }

  fd::VarId resolve_var(CellRef origin, CellRef ref) {
    if (auto it = cm_.cell_to_var.find(ref); it != cm_.cell_to_var.end()) return it->second;
    fail(K::UnknownCellReference, origin, format_cell_ref(ref) + " is not a variable cell");
  }

  std::vector<fd::Operand> resolve_all(CellRef origin, const CellList& cells) {
    std::vector<fd::Operand> out;
    out.reserve(cells.size());
    for (CellRef c : cells) out.push_back(resolve(origin, c));
    return out;
  }

  /// Right-hand side as exactly `count` operands.
  std::vector<fd::Operand> rhs_list(CellRef origin, const sscl::RhsSpec& rhs, std::size_t count) {
    std::vector<fd::Operand> out;
    if (const auto* s = std::get_if<sscl::Scalar>(&rhs)) {
      out.assign(count, s->value);
    } else if (const auto* l = std::get_if<sscl::IntList>(&rhs)) {
      out.assign(l->values.begin(), l->values.end());
    } else {
      out = resolve_all(origin, var_list(std::get<CellRange>(rhs)));
    }
    if (out.size() != count) {
      fail(K::LengthMismatch, origin,
           "right-hand side has " + std::to_string(out.size()) + " entries, expected " +
               std::to_string(count));
    }
    return out;
  }

  static CellGroups groups(sscl::Orientation o, const CellRange& r) {
    switch (o) {
      case sscl::Orientation::All: return {var_list(r)};
      case sscl::Orientation::Rows: return var_list_by_row(r);
      case sscl::Orientation::Cols: return var_list_by_col(r);
      case sscl::Orientation::Diag: return var_list_by_diag(r);
      case sscl::Orientation::BackDiag: return var_list_by_back_diag(r);
    }
    return {};
  }

  void lower(CellRef cell, const sscl::Constraint& ast) {
    std::visit([&](const auto& c) { lower_one(cell, c); }, ast);
  }

  void lower_one(CellRef, const sscl::Domain&) {}
  void lower_one(CellRef, const sscl::VarRange&) {}
  void lower_one(CellRef, const sscl::ConstraintRange&) {}

  void lower_one(CellRef cell, const sscl::AllDifferent& c) {
    for (const auto& g : groups(c.orientation, c.range)) {
      auto items = resolve_all(cell, g);
      fd::post_all_different(cm_.model, std::span<const fd::Operand>(items));
    }
  }

  void lower_one(CellRef cell, const sscl::Aggregate& c) {
    const CellGroups gs = groups(c.orientation, c.range);
    const auto rhs = rhs_list(cell, c.rhs, gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
      auto items = resolve_all(cell, gs[i]);
      fd::post_fold_aggregate(cm_.model, c.op, std::span<const fd::Operand>(items), c.rel, rhs[i]);
    }
  }

  void lower_one(CellRef cell, const sscl::PairsOp& c) {
    const auto lhs = resolve_all(cell, var_list(c.lhs));
    const auto mid = resolve_all(cell, var_list(c.mid));
    if (lhs.size() != mid.size()) {
      fail(K::LengthMismatch, cell,
           "operand ranges have " + std::to_string(lhs.size()) + " and " +
               std::to_string(mid.size()) + " cells");
    }
    const auto rhs = rhs_list(cell, c.rhs, lhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const fd::Operand pair[2] = {lhs[i], mid[i]};
      fd::post_fold_aggregate(cm_.model, c.op, std::span<const fd::Operand>(pair), c.rel, rhs[i]);
    }
  }

  void lower_one(CellRef cell, const sscl::NthElement& c) {
    fd::Element e;
    if (const auto* ref = std::get_if<CellRef>(&c.index)) {
      e.index = resolve(cell, *ref);
    } else {
      e.index = std::get<std::int64_t>(c.index);
    }
    if (const auto* l = std::get_if<sscl::IntList>(&c.list)) {
      e.list.assign(l->values.begin(), l->values.end());
    } else {
      e.list = resolve_all(cell, var_list(std::get<CellRange>(c.list)));
    }
    e.value = resolve_var(cell, c.value);
    cm_.model.post(std::move(e));
  }

  void set_objective(CellRef cell, CellRef target, fd::Direction dir) {
    if (cm_.model.objective) {
      fail(K::MultipleObjectives, cell,
           "objective already set by " + format_cell_ref(*cm_.objective_cell));
    }
    cm_.model.objective = fd::Objective{dir, resolve_var(cell, target)};
    cm_.objective_cell = cell;
  }

  void lower_one(CellRef cell, const sscl::Minimize& c) {
    set_objective(cell, c.var, fd::Direction::Minimize);
  }
  void lower_one(CellRef cell, const sscl::Maximize& c) {
    set_objective(cell, c.var, fd::Direction::Maximize);
  }

  struct Linear {
    std::vector<fd::LinearTerm> terms;
    __int128 constant = 0;
  };

  static void add_term(Linear& l, __int128 coef, fd::VarId v) {
    for (auto& t : l.terms) {
      if (t.var == v) {
        t.coef = fd::detail::checked(t.coef + coef);
        return;
      }
    }
    l.terms.push_back({fd::detail::checked(coef), v});
  }

  static Linear combine(Linear a, const Linear& b, __int128 sign) {
    for (const auto& t : b.terms) add_term(a, sign * t.coef, t.var);
    a.constant = fd::detail::checked(a.constant + sign * b.constant);
    return a;
  }

  static Linear scale(Linear a, __int128 k) {
    for (auto& t : a.terms) t.coef = fd::detail::checked(t.coef * k);
    a.constant = fd::detail::checked(a.constant * k);
    return a;
  }

  static void prune(Linear& l) {
    std::erase_if(l.terms, [](const fd::LinearTerm& t) { return t.coef == 0; });
  }

  /// A variable equal to `l`, reusing it when `l` is already a bare variable.
  fd::VarId as_var(Linear l) {
    prune(l);
    if (l.terms.size() == 1 && l.terms[0].coef == 1 && l.constant == 0) return l.terms[0].var;
    __int128 lo = l.constant, hi = l.constant;
    for (const auto& t : l.terms) {
      const auto& d = cm_.model.domain(t.var);
      __int128 a = static_cast<__int128>(t.coef) * d.min();
      __int128 b = static_cast<__int128>(t.coef) * d.max();
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    fd::VarId aux = cm_.model.new_var(
        fd::Domain::interval(fd::detail::checked(lo), fd::detail::checked(hi)),
        "_aux" + std::to_string(cm_.model.num_vars()));
    auto terms = l.terms;
    terms.push_back({-1, aux});
    cm_.model.post(fd::LinearRel{std::move(terms), RelOp::Eq, fd::detail::checked(-l.constant)});
    return aux;
  }

  Linear flatten(CellRef cell, const sscl::ArithExpr& e) {
    using Kind = sscl::ArithExpr::Kind;
    switch (e.kind()) {
      case Kind::Const: return Linear{{}, e.value()};
      case Kind::Cell: {
        fd::Operand o = resolve(cell, e.cell_ref());
        if (const auto* v = std::get_if<fd::VarId>(&o)) return Linear{{{1, *v}}, 0};
        return Linear{{}, std::get<std::int64_t>(o)};
      }
      case Kind::Binary: break;
    }
    Linear l = flatten(cell, e.lhs());
    Linear r = flatten(cell, e.rhs());
    switch (e.op()) {
      case ArithOp::Add: return combine(std::move(l), r, 1);
      case ArithOp::Sub: return combine(std::move(l), r, -1);
      case ArithOp::Mul: break;
    }
    prune(l);
    prune(r);
    if (l.terms.empty()) return scale(std::move(r), l.constant);
    if (r.terms.empty()) return scale(std::move(l), r.constant);
    fd::VarId a = as_var(std::move(l));
    fd::VarId b = as_var(std::move(r));
    fd::Domain hull = fd::detail::product_hull(cm_.model.domain(a).min(), cm_.model.domain(a).max(),
                                               cm_.model.domain(b).min(), cm_.model.domain(b).max());
    fd::VarId p = cm_.model.new_var(std::move(hull), "_mul" + std::to_string(cm_.model.num_vars()));
    cm_.model.post(fd::Mul{a, b, p});
    return Linear{{{1, p}}, 0};
  }

  void lower_one(CellRef cell, const sscl::RelConstraint& c) {
    Linear diff = combine(flatten(cell, c.left), flatten(cell, c.right), -1);
    prune(diff);
    cm_.model.post(
        fd::LinearRel{std::move(diff.terms), c.rel, fd::detail::checked(-diff.constant)});
  }

  const Workbook& wb_;
  CompiledModel cm_;
  std::vector<CompileError> errors_;
};

}  // namespace detail

/// Lowers every constraint of the workbook into a solver model. Throws
/// CompileFailure carrying every error found.
inline CompiledModel compile(const Workbook& wb) { return detail::Lowering(wb).run(); }

/// Writes the solution into the variable cells, snapshotting the original
/// inputs first if no snapshot exists.
inline Workbook apply_solution(Workbook wb, const CompiledModel& cm, const fd::Solution& s) {
  if (!wb.has_snapshot()) wb.snapshot();
  for (const auto& [cell, var] : cm.cell_to_var) wb.set_value(cell, s[var]);
  return wb;
}

}  // namespace csee
