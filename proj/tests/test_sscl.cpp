#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "csee/sscl_parser.hpp"

using namespace csee;
using namespace csee::sscl;

namespace {

CellRange rng_of(int c1, int r1, int c2, int r2) { return CellRange{{c1, r1}, {c2, r2}}; }

ArithExpr cell(const char* text) { return ArithExpr::cell(parse_cell_ref(text)); }

class AstGen {
 public:
  explicit AstGen(unsigned seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  CellRef ref() { return CellRef{uniform(1, 256), uniform(1, 65536)}; }

  CellRange range() {
    int c1 = uniform(1, 30), r1 = uniform(1, 100);
    return rng_of(c1, r1, c1 + uniform(0, 5), r1 + uniform(0, 5));
  }

  RangeList range_list() {
    RangeList list;
    int n = uniform(1, 3);
    for (int i = 0; i < n; ++i) {
      if (uniform(0, 1)) list.items.emplace_back(ref());
      else list.items.emplace_back(range());
    }
    return list;
  }

  std::vector<std::int64_t> ints(int min_len) {
    std::vector<std::int64_t> v;
    int n = uniform(min_len, 5);
    for (int i = 0; i < n; ++i) v.push_back(uniform(-50, 50));
    return v;
  }

  RelOp rel() { return static_cast<RelOp>(uniform(0, 5)); }
  ArithOp agg_op() { return uniform(0, 1) ? ArithOp::Add : ArithOp::Mul; }

  RhsSpec rhs() {
    switch (uniform(0, 2)) {
      case 0: return Scalar{uniform(-100, 100)};
      case 1: return IntList{ints(1)};
      default: return range();
    }
  }

  ArithExpr expr(int depth) {
    int pick = depth == 0 ? uniform(0, 1) : uniform(0, 4);
    if (pick == 0) return ArithExpr::constant(uniform(-1000, 1000));
    if (pick == 1) return ArithExpr::cell(ref());
    ArithOp op = static_cast<ArithOp>(uniform(0, 2));
    return ArithExpr::binary(op, expr(depth - 1), expr(depth - 1));
  }

  Constraint constraint() {
    switch (uniform(0, 9)) {
      case 0: {
        Domain d{range_list(), {}};
        if (uniform(0, 1)) {
          int lo = uniform(-10, 10);
          d.dom = IntervalDom{lo, lo + uniform(0, 20)};
        } else {
          d.dom = make_list_dom(ints(1));
        }
        return d;
      }
      case 1: return AllDifferent{static_cast<Orientation>(uniform(0, 4)), range()};
      case 2:
        return Aggregate{static_cast<Orientation>(uniform(1, 4)), agg_op(), range(), rel(), rhs()};
      case 3: return PairsOp{range(), agg_op(), range(), rel(), rhs()};
      case 4: {
        NthElement n;
        if (uniform(0, 1)) n.index = ref();
        else n.index = std::int64_t{uniform(-3, 9)};
        if (uniform(0, 1)) n.list = IntList{ints(1)};
        else n.list = range();
        n.value = ref();
        return n;
      }
      case 5: return Minimize{ref()};
      case 6: return Maximize{ref()};
      case 7: return VarRange{range_list()};
      case 8: return ConstraintRange{range_list()};
      default: return RelConstraint{expr(3), rel(), expr(3)};
    }
  }

  std::mt19937& engine() { return rng_; }

 private:
  std::mt19937 rng_;
};

}  // namespace

TEST_CASE("classify_input examples", "[sscl]") {
  CHECK(classify_input("") == CellContent{EmptyCell{}});
  CHECK(classify_input("   ") == CellContent{EmptyCell{}});
  CHECK(classify_input("42") == CellContent{IntValue{42}});
  CHECK(classify_input(" -7 ") == CellContent{IntValue{-7}});
  CHECK(classify_input("0..1") == CellContent{DomainLiteral{IntervalDom{0, 1}}});
  CHECK(classify_input("-3..3") == CellContent{DomainLiteral{IntervalDom{-3, 3}}});
  CHECK(classify_input("[2,5,7]") == CellContent{DomainLiteral{ListDom{{2, 5, 7}}}});
  CHECK(classify_input("[7,2,2,5]") == CellContent{DomainLiteral{ListDom{{2, 5, 7}}}});
  const auto f = classify_input("ssMin(C16)");
  REQUIRE(std::holds_alternative<Formula>(f));
  CHECK(std::get<Formula>(f).ast == Constraint{Minimize{{3, 16}}});
  CHECK(std::get<Formula>(f).source == "ssMin(C16)");
}

TEST_CASE("classify_input rejects empty intervals and bad formulas", "[sscl][errors]") {
  CHECK_THROWS_AS(classify_input("5..1"), ParseError);
  CHECK_THROWS_AS(classify_input("hello"), ParseError);
  try {
    classify_input("  ssDomain(A1:H8,)");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 17);
  }
}

TEST_CASE("parse examples from workbooks", "[sscl]") {
  CHECK(parse_constraint("ssDomain(A1:H8, 0, 1)") ==
        Constraint{Domain{RangeList{{rng_of(1, 1, 8, 8)}}, IntervalDom{0, 1}}});
  CHECK(parse_constraint("ssRowsAggregate(+, A1:H8, #=, 1)") ==
        Constraint{Aggregate{Orientation::Rows, ArithOp::Add, rng_of(1, 1, 8, 8), RelOp::Eq,
                             Scalar{1}}});
  CHECK(parse_constraint("ssDiagonalAggregate(+, A1:H8, #=<, [1,1,1])") ==
        Constraint{Aggregate{Orientation::Diag, ArithOp::Add, rng_of(1, 1, 8, 8), RelOp::Le,
                             IntList{{1, 1, 1}}}});
  CHECK(parse_constraint("ssPairsOp(A1:A3, +, B1:B3, #=, C1:C3)") ==
        Constraint{PairsOp{rng_of(1, 1, 1, 3), ArithOp::Add, rng_of(2, 1, 2, 3), RelOp::Eq,
                           rng_of(3, 1, 3, 3)}});
  CHECK(parse_constraint("ssNthElement(A1, [3,1,4], B1)") ==
        Constraint{NthElement{CellRef{1, 1}, IntList{{3, 1, 4}}, CellRef{2, 1}}});
  CHECK(parse_constraint("ssVarRange([A1:C3,E6:F9,G10])") ==
        Constraint{VarRange{RangeList{{rng_of(1, 1, 3, 3), rng_of(5, 6, 6, 9), CellRef{7, 10}}}}});
  CHECK(parse_constraint("ssMax(D1)") == Constraint{Maximize{{4, 1}}});
  CHECK(parse_constraint("ssAllDifferent(A1:I1)") ==
        Constraint{AllDifferent{Orientation::All, rng_of(1, 1, 9, 1)}});

  const Constraint rel = parse_constraint("A1+4 #< B2");
  CHECK(rel == Constraint{RelConstraint{
                   ArithExpr::binary(ArithOp::Add, cell("A1"), ArithExpr::constant(4)), RelOp::Lt,
                   cell("B2")}});
}

TEST_CASE("free-form relations respect precedence and associativity", "[sscl]") {
  const auto r = std::get<RelConstraint>(parse_constraint("A1 - B1 - C1 + 2*D1*E1 #= 0"));
  const auto expected = ArithExpr::binary(
      ArithOp::Add,
      ArithExpr::binary(ArithOp::Sub, ArithExpr::binary(ArithOp::Sub, cell("A1"), cell("B1")),
                        cell("C1")),
      ArithExpr::binary(ArithOp::Mul,
                        ArithExpr::binary(ArithOp::Mul, ArithExpr::constant(2), cell("D1")),
                        cell("E1")));
  CHECK(r.left == expected);
  CHECK(r.right == ArithExpr::constant(0));

  const auto p = std::get<RelConstraint>(parse_constraint("(A1+B1)*3 #>= -C1"));
  CHECK(p.left == ArithExpr::binary(ArithOp::Mul,
                                    ArithExpr::binary(ArithOp::Add, cell("A1"), cell("B1")),
                                    ArithExpr::constant(3)));
  CHECK(p.right == ArithExpr::binary(ArithOp::Mul, ArithExpr::constant(-1), cell("C1")));
}

TEST_CASE("render examples", "[sscl]") {
  CHECK(render(parse_constraint("ssdomain( a1:h8 ,0,1 )")) == "ssDomain(A1:H8, 0, 1)");
  CHECK(render(parse_constraint("SSROWSAGGREGATE(+,A1:H8,=,1)")) ==
        "ssRowsAggregate(+, A1:H8, #=, 1)");
  CHECK(render(parse_constraint("ssMin(c16)")) == "ssMin(C16)");
  CHECK(render(parse_constraint("A1 + 4 < B2")) == "A1+4 #< B2");
  CHECK(render(parse_constraint("A1-(B1-C1) #\\= 2*(D1+E1)")) == "A1-(B1-C1) #\\= 2*(D1+E1)");
  CHECK(render(parse_constraint("ssDomain(A1, [3,1])")) == "ssDomain(A1, [1,3])");
  CHECK(render(parse_constraint("ssDomain(A1, 4)")) == "ssDomain(A1, [4])");
}

TEST_CASE("relational operator aliases parse identically", "[sscl]") {
  const std::vector<std::pair<std::vector<std::string>, RelOp>> groups = {
      {{"#=", "="}, RelOp::Eq},        {{"#\\="}, RelOp::Neq},
      {{"#<", "<"}, RelOp::Lt},        {{"#=<", "<=", "=<"}, RelOp::Le},
      {{"#>", ">"}, RelOp::Gt},        {{"#>=", ">="}, RelOp::Ge},
  };
  for (const auto& [spellings, op] : groups) {
    for (const auto& s : spellings) {
      INFO(s);
      const auto a = std::get<Aggregate>(parse_constraint("ssColsAggregate(+, A1:B2, " + s + ", 3)"));
      CHECK(a.rel == op);
      const auto r = std::get<RelConstraint>(parse_constraint("A1 " + s + " 3"));
      CHECK(r.rel == op);
    }
  }
}

TEST_CASE("function names are case-insensitive", "[sscl]") {
  CHECK(parse_constraint("SSALLDIFFERENT(A1:C1)") == parse_constraint("ssAllDifferent(A1:C1)"));
  CHECK(parse_constraint("ssbackdiagonalsalldifferent(A1:C3)") ==
        Constraint{AllDifferent{Orientation::BackDiag, rng_of(1, 1, 3, 3)}});
}

TEST_CASE("render then parse is the identity on generated constraints", "[sscl][property]") {
  AstGen gen(2024);
  for (int i = 0; i < 3000; ++i) {
    const Constraint c = gen.constraint();
    const std::string text = render(c);
    INFO(text);
    CHECK(parse_constraint(text) == c);
    CHECK(render(parse_constraint(text)) == text);
  }
}

TEST_CASE("parse errors report position", "[sscl][errors]") {
  struct Case {
    std::string text;
    std::size_t position;
    std::string fragment;
  };
  const std::vector<Case> cases = {
      {"ssDomain(A1:H8,)", 15, "expected integer"},
      {"ssFoo(A1)", 0, "unknown function"},
      {"ssMin(A1, B1)", 8, "expects 1 arguments"},
      {"A1 + B1", 7, "missing relational operator"},
      {"A1 #< B1 #< C1", 9, "only one relational operator"},
      {"A1 / 2 #= B1", 3, "division"},
      {"ssAllDifferent(B2:A1)", 15, "inverted"},
      {"ssRowsAggregate(-, A1:B2, #=, 1)", 16, "aggregation operator"},
      {"ssDomain(A1, 5, 1)", 13, "empty domain interval"},
      {"ssDomain(ZZ1, 0, 1)", 9, "column"},
      {"A0 #= 1", 1, "row"},
  };
  for (const auto& c : cases) {
    INFO(c.text);
    try {
      parse_constraint(c.text);
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.position() == c.position);
      CHECK(std::string(e.detail()).find(c.fragment) != std::string::npos);
    }
  }
}

TEST_CASE("malformed input only ever raises ParseError within bounds", "[sscl][property]") {
  AstGen gen(99);
  const std::string alphabet = "ssDomainAllRows()[],:.+-*#=<>\\/ 0123456789ABCZ";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  int errors = 0;
  for (int i = 0; i < 4000; ++i) {
    std::string text = render(gen.constraint());
    const int edits = gen.uniform(1, 4);
    for (int k = 0; k < edits; ++k) {
      const std::size_t at = gen.uniform(0, static_cast<int>(text.size()));
      switch (gen.uniform(0, 2)) {
        case 0:
          if (at < text.size()) text.erase(at, 1);
          break;
        case 1: text.insert(at, 1, alphabet[pick(gen.engine())]); break;
        default:
          if (at < text.size()) text[at] = alphabet[pick(gen.engine())];
      }
    }
    INFO(text);
    try {
      const Constraint c = parse_constraint(text);
      CHECK(parse_constraint(render(c)) == c);
    } catch (const ParseError& e) {
      ++errors;
      CHECK(e.position() <= text.size());
    }
  }
  CHECK(errors > 1000);
}
