#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "csee/cell_ref.hpp"
#include "csee/types.hpp"

namespace csee::sscl {

/// Integer expression tree over cells: constants, cell variables and
/// binary +, -, *.
class ArithExpr {
 public:
  enum class Kind { Const, Cell, Binary };

  static ArithExpr constant(std::int64_t v) {
    ArithExpr e;
    e.kind_ = Kind::Const;
    e.value_ = v;
    return e;
  }
  static ArithExpr cell(CellRef ref) {
    ArithExpr e;
    e.kind_ = Kind::Cell;
    e.cell_ = ref;
    return e;
  }
  static ArithExpr binary(ArithOp op, ArithExpr lhs, ArithExpr rhs) {
    ArithExpr e;
    e.kind_ = Kind::Binary;
    e.op_ = op;
    e.lhs_ = std::make_shared<const ArithExpr>(std::move(lhs));
    e.rhs_ = std::make_shared<const ArithExpr>(std::move(rhs));
    return e;
  }

  Kind kind() const { return kind_; }
  std::int64_t value() const { return value_; }
  CellRef cell_ref() const { return cell_; }
  ArithOp op() const { return op_; }
  const ArithExpr& lhs() const { return *lhs_; }
  const ArithExpr& rhs() const { return *rhs_; }

  friend bool operator==(const ArithExpr& a, const ArithExpr& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
      case Kind::Const: return a.value_ == b.value_;
      case Kind::Cell: return a.cell_ == b.cell_;
      case Kind::Binary: return a.op_ == b.op_ && *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
    }
    return false;
  }

 private:
  ArithExpr() = default;

  Kind kind_ = Kind::Const;
  std::int64_t value_ = 0;
  CellRef cell_{};
  ArithOp op_ = ArithOp::Add;
  std::shared_ptr<const ArithExpr> lhs_;
  std::shared_ptr<const ArithExpr> rhs_;
};

struct Scalar {
  std::int64_t value = 0;
  friend bool operator==(const Scalar&, const Scalar&) = default;
};

struct IntList {
  std::vector<std::int64_t> values;
  friend bool operator==(const IntList&, const IntList&) = default;
};

/// Right-hand side of aggregates and pairwise ops: one integer broadcast to
/// every group, an explicit list, or a cell range read positionally.
using RhsSpec = std::variant<Scalar, IntList, CellRange>;

enum class Orientation { All, Rows, Cols, Diag, BackDiag };

struct Domain {
  RangeList range;
  DomainSpec dom;
  friend bool operator==(const Domain&, const Domain&) = default;
};

struct AllDifferent {
  Orientation orientation = Orientation::All;
  CellRange range;
  friend bool operator==(const AllDifferent&, const AllDifferent&) = default;
};

/// Orientation is never All here.
struct Aggregate {
  Orientation orientation = Orientation::Rows;
  ArithOp op = ArithOp::Add;
  CellRange range;
  RelOp rel = RelOp::Eq;
  RhsSpec rhs;
  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct PairsOp {
  CellRange lhs;
  ArithOp op = ArithOp::Add;
  CellRange mid;
  RelOp rel = RelOp::Eq;
  RhsSpec rhs;
  friend bool operator==(const PairsOp&, const PairsOp&) = default;
};

/// value = list[index], 1-based. `list` is an IntList or a CellRange.
struct NthElement {
  std::variant<CellRef, std::int64_t> index;
  RhsSpec list;
  CellRef value;
  friend bool operator==(const NthElement&, const NthElement&) = default;
};

struct Minimize {
  CellRef var;
  friend bool operator==(const Minimize&, const Minimize&) = default;
};

struct Maximize {
  CellRef var;
  friend bool operator==(const Maximize&, const Maximize&) = default;
};

struct VarRange {
  RangeList range;
  friend bool operator==(const VarRange&, const VarRange&) = default;
};

struct ConstraintRange {
  RangeList range;
  friend bool operator==(const ConstraintRange&, const ConstraintRange&) = default;
};

/// Free-form relation such as `A1+4 #< B2`.
struct RelConstraint {
  ArithExpr left;
  RelOp rel = RelOp::Eq;
  ArithExpr right;
  friend bool operator==(const RelConstraint&, const RelConstraint&) = default;
};

using Constraint = std::variant<Domain, AllDifferent, Aggregate, PairsOp, NthElement, Minimize,
                                Maximize, VarRange, ConstraintRange, RelConstraint>;

}  // namespace csee::sscl
