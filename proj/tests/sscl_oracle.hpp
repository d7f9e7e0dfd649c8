#pragma once

// Reference semantics for SSCL workbooks: evaluates constraint ASTs
// directly against a total assignment and enumerates every assignment.
// Shares only the parser and workbook model with the engine.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "csee/cell_ref.hpp"
#include "csee/sscl_parser.hpp"
#include "csee/workbook.hpp"

namespace oracle {

using csee::CellRange;
using csee::CellRef;
using Assignment = std::map<CellRef, std::int64_t>;

inline bool rel_holds(std::int64_t a, csee::RelOp op, std::int64_t b) {
  switch (op) {
    case csee::RelOp::Eq: return a == b;
    case csee::RelOp::Neq: return a != b;
    case csee::RelOp::Lt: return a < b;
    case csee::RelOp::Le: return a <= b;
    case csee::RelOp::Gt: return a > b;
    case csee::RelOp::Ge: return a >= b;
  }
  return false;
}

inline std::int64_t apply(csee::ArithOp op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case csee::ArithOp::Add: return a + b;
    case csee::ArithOp::Sub: return a - b;
    case csee::ArithOp::Mul: return a * b;
  }
  return 0;
}

inline std::vector<CellRef> cells(const CellRange& r) {
  std::vector<CellRef> out;
  for (int row = r.top_left.row; row <= r.bottom_right.row; ++row) {
    for (int col = r.top_left.col; col <= r.bottom_right.col; ++col) out.push_back({col, row});
  }
  return out;
}

inline std::vector<CellRef> cells(const csee::RangeList& list) {
  std::vector<CellRef> out;
  for (const auto& item : list.items) {
    if (const auto* ref = std::get_if<CellRef>(&item)) {
      out.push_back(*ref);
    } else {
      auto part = cells(std::get<CellRange>(item));
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  return out;
}

// Groups keyed by a per-cell number, ordered as the orientation requires.
inline std::vector<std::vector<CellRef>> groups(csee::sscl::Orientation o, const CellRange& r) {
  using O = csee::sscl::Orientation;
  if (o == O::All) return {cells(r)};
  std::map<int, std::vector<CellRef>> by_key;
  for (CellRef c : cells(r)) {
    int key = 0;
    switch (o) {
      case O::Rows: key = c.row; break;
      case O::Cols: key = c.col; break;
      case O::Diag: key = -(c.row - c.col); break;  // bottom-left first
      case O::BackDiag: key = c.row + c.col; break;
      case O::All: break;
    }
    by_key[key].push_back(c);
  }
  std::vector<std::vector<CellRef>> out;
  for (auto& [k, g] : by_key) {
    if (o == O::Cols) {
      std::sort(g.begin(), g.end(), [](CellRef a, CellRef b) { return a.row < b.row; });
    } else {
      std::sort(g.begin(), g.end(), [](CellRef a, CellRef b) { return a.col < b.col; });
    }
    out.push_back(g);
  }
  return out;
}

/// Evaluates one workbook under an assignment of its variable cells.
class Evaluator {
 public:
  Evaluator(const csee::Workbook& wb, const Assignment& a) : wb_(wb), a_(a) {}

  std::int64_t value(CellRef c) const {
    if (auto it = a_.find(c); it != a_.end()) return it->second;
    return std::get<csee::IntValue>(wb_.content(c)).value;
  }

  std::vector<std::int64_t> rhs(const csee::sscl::RhsSpec& spec, std::size_t n) const {
    if (const auto* s = std::get_if<csee::sscl::Scalar>(&spec)) {
      return std::vector<std::int64_t>(n, s->value);
    }
    if (const auto* l = std::get_if<csee::sscl::IntList>(&spec)) return l->values;
    std::vector<std::int64_t> out;
    for (CellRef c : cells(std::get<CellRange>(spec))) out.push_back(value(c));
    return out;
  }

  std::int64_t expr(const csee::sscl::ArithExpr& e) const {
    using K = csee::sscl::ArithExpr::Kind;
    switch (e.kind()) {
      case K::Const: return e.value();
      case K::Cell: return value(e.cell_ref());
      case K::Binary: return apply(e.op(), expr(e.lhs()), expr(e.rhs()));
    }
    return 0;
  }

  bool holds(const csee::sscl::Constraint& c) const {
    using namespace csee::sscl;
    if (const auto* d = std::get_if<Domain>(&c)) {
      for (CellRef cell : cells(d->range)) {
        if (!in_domain(value(cell), d->dom)) return false;
      }
      return true;
    }
    if (const auto* ad = std::get_if<AllDifferent>(&c)) {
      for (const auto& g : groups(ad->orientation, ad->range)) {
        std::set<std::int64_t> seen;
        for (CellRef cell : g) {
          if (!seen.insert(value(cell)).second) return false;
        }
      }
      return true;
    }
    if (const auto* ag = std::get_if<Aggregate>(&c)) {
      const auto gs = groups(ag->orientation, ag->range);
      const auto r = rhs(ag->rhs, gs.size());
      for (std::size_t i = 0; i < gs.size(); ++i) {
        std::int64_t acc = value(gs[i][0]);
        for (std::size_t k = 1; k < gs[i].size(); ++k) acc = apply(ag->op, acc, value(gs[i][k]));
        if (!rel_holds(acc, ag->rel, r.at(i))) return false;
      }
      return true;
    }
    if (const auto* p = std::get_if<PairsOp>(&c)) {
      const auto l = cells(p->lhs);
      const auto m = cells(p->mid);
      const auto r = rhs(p->rhs, l.size());
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!rel_holds(apply(p->op, value(l[i]), value(m.at(i))), p->rel, r.at(i))) return false;
      }
      return true;
    }
    if (const auto* n = std::get_if<NthElement>(&c)) {
      const std::int64_t idx = std::holds_alternative<CellRef>(n->index)
                                   ? value(std::get<CellRef>(n->index))
                                   : std::get<std::int64_t>(n->index);
      std::vector<std::int64_t> list;
      if (const auto* l = std::get_if<IntList>(&n->list)) {
        list = l->values;
      } else {
        for (CellRef cell : cells(std::get<CellRange>(n->list))) list.push_back(value(cell));
      }
      if (idx < 1 || idx > static_cast<std::int64_t>(list.size())) return false;
      return list[static_cast<std::size_t>(idx - 1)] == value(n->value);
    }
    if (const auto* r = std::get_if<RelConstraint>(&c)) {
      return rel_holds(expr(r->left), r->rel, expr(r->right));
    }
    return true;  // objectives and range declarations
  }

  static bool in_domain(std::int64_t v, const csee::DomainSpec& d) {
    if (const auto* iv = std::get_if<csee::IntervalDom>(&d)) return iv->lo <= v && v <= iv->hi;
    const auto& vals = std::get<csee::ListDom>(d).values;
    return std::find(vals.begin(), vals.end(), v) != vals.end();
  }

 private:
  const csee::Workbook& wb_;
  const Assignment& a_;
};

struct Ranges {
  std::vector<CellRef> vars;  // in declaration order
  std::vector<CellRef> constraint_cells;
};

inline Ranges find_ranges(const csee::Workbook& wb) {
  Ranges out;
  for (const auto& [ref, cell] : wb.cells()) {
    const auto* f = std::get_if<csee::Formula>(&cell.content);
    if (!f) continue;
    if (const auto* v = std::get_if<csee::sscl::VarRange>(&f->ast)) out.vars = cells(v->range);
    if (const auto* c = std::get_if<csee::sscl::ConstraintRange>(&f->ast)) {
      for (CellRef cc : cells(c->range)) {
        if (std::holds_alternative<csee::Formula>(wb.content(cc))) out.constraint_cells.push_back(cc);
      }
    }
  }
  return out;
}

struct Enumeration {
  /// Feasible tuples over the variable cells, lexicographic in var order.
  std::vector<std::vector<std::int64_t>> solutions;
  std::optional<CellRef> objective_cell;
  bool maximize = false;
  std::optional<std::int64_t> optimum;
};

/// Every assignment of the variable cells drawn from `universe` that
/// satisfies the cell-level domain literals and every constraint.
inline Enumeration enumerate(const csee::Workbook& wb, std::int64_t lo, std::int64_t hi) {
  const Ranges ranges = find_ranges(wb);
  std::vector<const csee::sscl::Constraint*> cons;
  Enumeration out;
  for (CellRef c : ranges.constraint_cells) {
    const auto& ast = std::get<csee::Formula>(wb.content(c)).ast;
    cons.push_back(&ast);
    if (const auto* m = std::get_if<csee::sscl::Minimize>(&ast)) out.objective_cell = m->var;
    if (const auto* m = std::get_if<csee::sscl::Maximize>(&ast)) {
      out.objective_cell = m->var;
      out.maximize = true;
    }
  }

  // Candidate values per cell: its own content first, then unary ssDomain
  // filters, so the product stays small.
  std::vector<std::vector<std::int64_t>> cand;
  for (CellRef v : ranges.vars) {
    std::vector<std::int64_t> vals;
    const auto& content = wb.content(v);
    for (std::int64_t x = lo; x <= hi; ++x) {
      bool ok = true;
      if (const auto* iv = std::get_if<csee::IntValue>(&content)) ok = x == iv->value;
      if (const auto* dl = std::get_if<csee::DomainLiteral>(&content)) {
        ok = Evaluator::in_domain(x, dl->dom);
      }
      for (const auto* c : cons) {
        if (const auto* d = std::get_if<csee::sscl::Domain>(c)) {
          const auto covered = cells(d->range);
          if (std::count(covered.begin(), covered.end(), v)) ok = ok && Evaluator::in_domain(x, d->dom);
        }
      }
      if (ok) vals.push_back(x);
    }
    cand.push_back(std::move(vals));
  }
  for (const auto& c : cand) {
    if (c.empty()) return out;
  }

  const std::size_t n = ranges.vars.size();
  std::vector<std::size_t> idx(n, 0);
  Assignment a;
  std::vector<std::int64_t> tuple(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      tuple[i] = cand[i][idx[i]];
      a[ranges.vars[i]] = tuple[i];
    }
    Evaluator ev(wb, a);
    bool ok = true;
    for (const auto* c : cons) {
      if (!ev.holds(*c)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.solutions.push_back(tuple);
      if (out.objective_cell) {
        const std::int64_t v = a.at(*out.objective_cell);
        if (!out.optimum || (out.maximize ? v > *out.optimum : v < *out.optimum)) out.optimum = v;
      }
    }
    std::size_t k = n;
    bool done = true;
    while (k > 0) {
      --k;
      if (++idx[k] < cand[k].size()) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) return out;
  }
}

/// Random workbooks: a var range of at most 3x3 at A1, domains within
/// 0..4, and 1-4 random constraints in column F.
class WorkbookGen {
 public:
  explicit WorkbookGen(unsigned seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  csee::Workbook make() {
    csee::Workbook wb("random");
    cols_ = uniform(1, 3);
    rows_ = uniform(1, 3);
    const CellRange vars{{1, 1}, {cols_, rows_}};
    wb.set({6, 1}, "ssVarRange(" + csee::format_range(vars) + ")");
    wb.set({6, 2}, "ssConstraintRange(F3:F9)");
    wb.set({8, 1}, std::to_string(uniform(0, 4)));  // data cell H1

    int row = 3;
    const bool cover = uniform(0, 2) != 0;
    for (CellRef c : cells(vars)) {
      if (cover && uniform(0, 2) != 0) continue;
      wb.set(c, domain_text());
    }
    if (cover) {
      const int lo = uniform(0, 1);
      wb.set({6, row++}, "ssDomain(" + csee::format_range(vars) + ", " + std::to_string(lo) + ", " +
                             std::to_string(uniform(2, 4)) + ")");
    }
    const int n = uniform(1, 4);
    bool objective = false;
    for (int i = 0; i < n; ++i) {
      std::string text = constraint_text(objective);
      wb.set({6, row++}, text);
    }
    return wb;
  }

  std::mt19937& engine() { return rng_; }

 private:
  std::string domain_text() {
    if (uniform(0, 1)) {
      const int lo = uniform(0, 2);
      return std::to_string(lo) + ".." + std::to_string(uniform(lo + 1, 4));
    }
    std::string s = "[";
    const int k = uniform(2, 4);
    for (int i = 0; i < k; ++i) s += (i ? "," : "") + std::to_string(uniform(0, 4));
    return s + "]";
  }

  CellRange sub_range() {
    const int c1 = uniform(1, cols_), r1 = uniform(1, rows_);
    return CellRange{{c1, r1}, {uniform(c1, cols_), uniform(r1, rows_)}};
  }

  CellRef var_cell() { return CellRef{uniform(1, cols_), uniform(1, rows_)}; }

  std::string rel() {
    static const std::vector<std::string> ops = {"#=", "=", "#\\=", "#<", "<", "#=<",
                                                 "<=", "#>", ">", "#>=", ">="};
    return ops[static_cast<std::size_t>(uniform(0, static_cast<int>(ops.size()) - 1))];
  }

  std::string int_list(std::size_t n, int lo, int hi) {
    std::string s = "[";
    for (std::size_t i = 0; i < n; ++i) s += (i ? "," : "") + std::to_string(uniform(lo, hi));
    return s + "]";
  }

  std::string rhs(std::size_t n, bool allow_range, int lo, int hi) {
    const int pick = uniform(0, allow_range ? 2 : 1);
    if (pick == 0) return std::to_string(uniform(lo, hi));
    if (pick == 1) return int_list(n, lo, hi);
    // A row or column of variable cells with exactly n cells, when one fits.
    if (static_cast<int>(n) <= cols_) {
      const int r = uniform(1, rows_);
      const int c1 = uniform(1, cols_ - static_cast<int>(n) + 1);
      return csee::format_range({{c1, r}, {c1 + static_cast<int>(n) - 1, r}});
    }
    if (static_cast<int>(n) <= rows_) {
      const int c = uniform(1, cols_);
      const int r1 = uniform(1, rows_ - static_cast<int>(n) + 1);
      return csee::format_range({{c, r1}, {c, r1 + static_cast<int>(n) - 1}});
    }
    return int_list(n, lo, hi);
  }

  std::string expr(int depth) {
    const int pick = depth == 0 ? uniform(0, 2) : uniform(0, 5);
    if (pick == 0) return std::to_string(uniform(-3, 6));
    if (pick == 1) return csee::format_cell_ref(var_cell());
    if (pick == 2) return uniform(0, 3) ? csee::format_cell_ref(var_cell()) : "H1";
    static const char* ops[] = {"+", "-", "*"};
    const std::string op = ops[uniform(0, 2)];
    std::string e = expr(depth - 1) + op + expr(depth - 1);
    return uniform(0, 2) ? e : "(" + e + ")";
  }

  std::string constraint_text(bool& objective) {
    using O = csee::sscl::Orientation;
    static const char* alldiff[] = {"ssAllDifferent", "ssRowsAllDifferent", "ssColsAllDifferent",
                                    "ssDiagonalsAllDifferent", "ssBackDiagonalsAllDifferent"};
    static const char* agg[] = {"ssRowsAggregate", "ssColsAggregate", "ssDiagonalAggregate",
                                "ssBackDiagonalAggregate"};
    switch (uniform(0, 6)) {
      case 0: return std::string(alldiff[uniform(0, 4)]) + "(" + csee::format_range(sub_range()) + ")";
      case 1: {
        const int o = uniform(0, 3);
        const CellRange r = sub_range();
        const auto count = groups(static_cast<O>(o + 1), r).size();
        const bool mul = uniform(0, 2) == 0;
        return std::string(agg[o]) + "(" + (mul ? "*" : "+") + ", " + csee::format_range(r) + ", " +
               rel() + ", " + rhs(count, true, 0, mul ? 16 : 8) + ")";
      }
      case 2: {
        const CellRange a = sub_range();
        const int h = a.bottom_right.row - a.top_left.row, w = a.bottom_right.col - a.top_left.col;
        const int c1 = uniform(1, cols_ - w), r1 = uniform(1, rows_ - h);
        const CellRange b{{c1, r1}, {c1 + w, r1 + h}};
        const bool mul = uniform(0, 1);
        const std::size_t n = cells(a).size();
        return "ssPairsOp(" + csee::format_range(a) + ", " + (mul ? "*" : "+") + ", " +
               csee::format_range(b) + ", " + rel() + ", " + rhs(n, true, 0, 8) + ")";
      }
      case 3: {
        std::string list = uniform(0, 1) ? int_list(static_cast<std::size_t>(uniform(1, 4)), 0, 4)
                                         : csee::format_range(sub_range());
        std::string index =
            uniform(0, 2) ? csee::format_cell_ref(var_cell()) : std::to_string(uniform(0, 3));
        return "ssNthElement(" + index + ", " + list + ", " + csee::format_cell_ref(var_cell()) + ")";
      }
      case 4:
        if (!objective) {
          objective = true;
          return std::string(uniform(0, 1) ? "ssMin(" : "ssMax(") +
                 csee::format_cell_ref(var_cell()) + ")";
        }
        [[fallthrough]];
      default: return expr(uniform(1, 2)) + " " + rel() + " " + expr(1);
    }
  }

  std::mt19937 rng_;
  int cols_ = 1;
  int rows_ = 1;
};

}  // namespace oracle
