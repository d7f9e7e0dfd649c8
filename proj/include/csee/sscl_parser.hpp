#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csee/cell_ref.hpp"
#include "csee/sscl_ast.hpp"
#include "csee/types.hpp"

namespace csee {

struct EmptyCell {
  friend bool operator==(const EmptyCell&, const EmptyCell&) = default;
};

struct IntValue {
  std::int64_t value = 0;
  friend bool operator==(const IntValue&, const IntValue&) = default;
};

struct DomainLiteral {
  DomainSpec dom;
  friend bool operator==(const DomainLiteral&, const DomainLiteral&) = default;
};

/// A constraint formula; `source` keeps the text exactly as entered.
struct Formula {
  sscl::Constraint ast;
  std::string source;
  friend bool operator==(const Formula&, const Formula&) = default;
};

using CellContent = std::variant<EmptyCell, IntValue, DomainLiteral, Formula>;

namespace sscl {

enum class Tok {
  Ident, Int, LParen, RParen, LBrack, RBrack, Comma, Colon, DotDot, Plus, Minus, Star, Rel, End
};

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  std::string_view text;
  std::int64_t value = 0;  // Int
  RelOp rel = RelOp::Eq;   // Rel
};

inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t len) {
    out.push_back(Token{k, i, text.substr(i, len)});
    i += len;
  };
  auto push_rel = [&](RelOp op, std::size_t len) {
    Token t{Tok::Rel, i, text.substr(i, len)};
    t.rel = op;
    out.push_back(t);
    i += len;
  };
  auto starts = [&](std::string_view s) { return text.substr(i, s.size()) == s; };

  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (std::isalpha(c) || c == '_') {
      std::size_t start = i;
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      out.push_back(Token{Tok::Ident, start, text.substr(start, i - start)});
    } else if (std::isdigit(c)) {
      std::size_t start = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      Token t{Tok::Int, start, text.substr(start, i - start)};
      auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + i, t.value);
      if (ec != std::errc{}) throw ParseError("integer literal out of range", start);
      out.push_back(t);
    } else if (starts("#\\=")) {
      push_rel(RelOp::Neq, 3);
    } else if (starts("#=<")) {
      push_rel(RelOp::Le, 3);
    } else if (starts("#>=")) {
      push_rel(RelOp::Ge, 3);
    } else if (starts("#=")) {
      push_rel(RelOp::Eq, 2);
    } else if (starts("#<")) {
      push_rel(RelOp::Lt, 2);
    } else if (starts("#>")) {
      push_rel(RelOp::Gt, 2);
    } else if (starts("=<") || starts("<=")) {
      push_rel(RelOp::Le, 2);
    } else if (starts(">=")) {
      push_rel(RelOp::Ge, 2);
    } else if (c == '=') {
      push_rel(RelOp::Eq, 1);
    } else if (c == '<') {
      push_rel(RelOp::Lt, 1);
    } else if (c == '>') {
      push_rel(RelOp::Gt, 1);
    } else if (starts("..")) {
      push(Tok::DotDot, 2);
    } else {
      switch (c) {
        case '(': push(Tok::LParen, 1); break;
        case ')': push(Tok::RParen, 1); break;
        case '[': push(Tok::LBrack, 1); break;
        case ']': push(Tok::RBrack, 1); break;
        case ',': push(Tok::Comma, 1); break;
        case ':': push(Tok::Colon, 1); break;
        case '+': push(Tok::Plus, 1); break;
        case '-': push(Tok::Minus, 1); break;
        case '*': push(Tok::Star, 1); break;
        case '/': throw ParseError("division is not supported", i);
        default:
          throw ParseError(std::string("unexpected character '") + text[i] + "'", i);
      }
    }
  }
  out.push_back(Token{Tok::End, text.size(), {}});
  return out;
}

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + std::string(t.text) + "'";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Constraint constraint() {
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::LParen) {
      Constraint c = call();
      expect(Tok::End, "end of input");
      return c;
    }
    return relation();
  }

  /// `lo..hi` or `[i1,...,ik]` spanning the whole input, else nullopt.
  std::optional<DomainSpec> domain_literal() {
    if (peek().kind == Tok::LBrack) {
      std::size_t save = at_;
      try {
        auto values = int_list();
        if (peek().kind == Tok::End) return make_list_dom(std::move(values));
      } catch (const ParseError&) {
      }
      at_ = save;
      return std::nullopt;
    }
    std::size_t save = at_;
    if (auto lo = try_int()) {
      if (peek().kind == Tok::DotDot) {
        std::size_t dots = peek().pos;
        ++at_;
        std::int64_t hi = integer();
        expect(Tok::End, "end of input");
        if (*lo > hi) throw ParseError("empty domain interval", dots);
        return IntervalDom{*lo, hi};
      }
    }
    at_ = save;
    return std::nullopt;
  }

  std::optional<std::int64_t> whole_integer() {
    std::size_t save = at_;
    if (auto v = try_int(); v && peek().kind == Tok::End) return v;
    at_ = save;
    return std::nullopt;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(at_ + ahead, tokens_.size() - 1)];
  }
  const Token& advance() { return tokens_[at_ < tokens_.size() - 1 ? at_++ : at_]; }

  const Token& expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) {
      throw ParseError("expected " + std::string(what) + ", found " + describe(peek()), peek().pos);
    }
    return advance();
  }

  std::optional<std::int64_t> try_int() {
    if (peek().kind == Tok::Int) return advance().value;
    if (peek().kind == Tok::Minus && peek(1).kind == Tok::Int) {
      ++at_;
      return -advance().value;
    }
    if (peek().kind == Tok::Plus && peek(1).kind == Tok::Int) {
      ++at_;
      return advance().value;
    }
    return std::nullopt;
  }

  std::int64_t integer() {
    if (auto v = try_int()) return *v;
    throw ParseError("expected integer, found " + describe(peek()), peek().pos);
  }

  std::vector<std::int64_t> int_list() {
    std::size_t open = expect(Tok::LBrack, "'['").pos;
    std::vector<std::int64_t> values;
    if (peek().kind == Tok::RBrack) throw ParseError("empty integer list", open);
    do {
      values.push_back(integer());
    } while (peek().kind == Tok::Comma && (advance(), true));
    expect(Tok::RBrack, "']'");
    return values;
  }

  CellRef cell() {
    const Token& t = peek();
    if (t.kind != Tok::Ident) {
      throw ParseError("expected cell reference, found " + describe(t), t.pos);
    }
    advance();
    return parse_cell_ref(t.text, t.pos);
  }

  /// A single ref is accepted as the one-cell range.
  CellRange range() {
    std::size_t start = peek().pos;
    CellRef tl = cell();
    if (peek().kind != Tok::Colon) return CellRange{tl, tl};
    advance();
    return make_range(tl, cell(), start);
  }

  RangeItem range_item() {
    std::size_t start = peek().pos;
    CellRef tl = cell();
    if (peek().kind != Tok::Colon) return tl;
    advance();
    return make_range(tl, cell(), start);
  }

  RangeList range_list() {
    RangeList list;
    if (peek().kind == Tok::LBrack) {
      std::size_t open = advance().pos;
      if (peek().kind == Tok::RBrack) throw ParseError("empty range list", open);
      do {
        list.items.push_back(range_item());
      } while (peek().kind == Tok::Comma && (advance(), true));
      expect(Tok::RBrack, "']'");
    } else {
      list.items.push_back(range_item());
    }
    return list;
  }

  ArithOp aggregation_op() {
    const Token& t = peek();
    if (t.kind == Tok::Plus) {
      advance();
      return ArithOp::Add;
    }
    if (t.kind == Tok::Star) {
      advance();
      return ArithOp::Mul;
    }
    throw ParseError("aggregation operator must be + or *, found " + describe(t), t.pos);
  }

  RelOp rel_op() {
    const Token& t = peek();
    if (t.kind != Tok::Rel) {
      throw ParseError("expected relational operator, found " + describe(t), t.pos);
    }
    advance();
    return t.rel;
  }

  RhsSpec rhs() {
    switch (peek().kind) {
      case Tok::LBrack: return IntList{int_list()};
      case Tok::Ident: return range();
      default: return Scalar{integer()};
    }
  }

  void comma(std::string_view fn, int arity) {
    if (peek().kind == Tok::RParen) {
      throw ParseError(std::string(fn) + " expects " + std::to_string(arity) + " arguments",
                       peek().pos);
    }
    expect(Tok::Comma, "','");
  }

  void close(std::string_view fn, int arity) {
    if (peek().kind == Tok::Comma) {
      throw ParseError(std::string(fn) + " expects " + std::to_string(arity) + " arguments",
                       peek().pos);
    }
    expect(Tok::RParen, "')'");
  }

  Constraint call() {
    const Token& name_tok = advance();
    const std::string fn(name_tok.text);
    const std::string name = lower(fn);
    advance();  // '('

    auto all_diff = [&](Orientation o) -> Constraint {
      AllDifferent c{o, range()};
      close(fn, 1);
      return c;
    };
    auto aggregate = [&](Orientation o) -> Constraint {
      Aggregate c;
      c.orientation = o;
      c.op = aggregation_op();
      comma(fn, 4);
      c.range = range();
      comma(fn, 4);
      c.rel = rel_op();
      comma(fn, 4);
      c.rhs = rhs();
      close(fn, 4);
      return c;
    };

    if (name == "ssdomain") {
      Domain c;
      c.range = range_list();
      comma(fn, 3);
      if (peek().kind == Tok::LBrack) {
        c.dom = make_list_dom(int_list());
      } else {
        std::size_t lo_pos = peek().pos;
        std::int64_t lo = integer();
        if (peek().kind == Tok::RParen) {
          c.dom = ListDom{{lo}};
        } else {
          expect(Tok::Comma, "','");
          std::int64_t hi = integer();
          if (lo > hi) throw ParseError("empty domain interval", lo_pos);
          c.dom = IntervalDom{lo, hi};
        }
      }
      close(fn, 3);
      return c;
    }
    if (name == "ssalldifferent") return all_diff(Orientation::All);
    if (name == "ssrowsalldifferent") return all_diff(Orientation::Rows);
    if (name == "sscolsalldifferent") return all_diff(Orientation::Cols);
    if (name == "ssdiagonalsalldifferent") return all_diff(Orientation::Diag);
    if (name == "ssbackdiagonalsalldifferent") return all_diff(Orientation::BackDiag);
    if (name == "ssrowsaggregate") return aggregate(Orientation::Rows);
    if (name == "sscolsaggregate") return aggregate(Orientation::Cols);
    if (name == "ssdiagonalaggregate") return aggregate(Orientation::Diag);
    if (name == "ssbackdiagonalaggregate") return aggregate(Orientation::BackDiag);
    if (name == "sspairsop") {
      PairsOp c;
      c.lhs = range();
      comma(fn, 5);
      c.op = aggregation_op();
      comma(fn, 5);
      c.mid = range();
      comma(fn, 5);
      c.rel = rel_op();
      comma(fn, 5);
      c.rhs = rhs();
      close(fn, 5);
      return c;
    }
    if (name == "ssnthelement") {
      NthElement c;
      if (peek().kind == Tok::Ident) {
        c.index = cell();
      } else {
        c.index = integer();
      }
      comma(fn, 3);
      if (peek().kind == Tok::LBrack) {
        c.list = IntList{int_list()};
      } else if (peek().kind == Tok::Ident) {
        c.list = range();
      } else {
        throw ParseError("expected integer list or cell range, found " + describe(peek()),
                         peek().pos);
      }
      comma(fn, 3);
      c.value = cell();
      close(fn, 3);
      return c;
    }
    if (name == "ssmin" || name == "ssmax") {
      CellRef v = cell();
      close(fn, 1);
      if (name == "ssmin") return Minimize{v};
      return Maximize{v};
    }
    if (name == "ssvarrange") {
      VarRange c{range_list()};
      close(fn, 1);
      return c;
    }
    if (name == "ssconstraintrange") {
      ConstraintRange c{range_list()};
      close(fn, 1);
      return c;
    }
    throw ParseError("unknown function '" + fn + "'", name_tok.pos);
  }

  Constraint relation() {
    ArithExpr left = expr();
    if (peek().kind != Tok::Rel) {
      throw ParseError("missing relational operator, found " + describe(peek()), peek().pos);
    }
    RelOp rel = advance().rel;
    ArithExpr right = expr();
    if (peek().kind == Tok::Rel) {
      throw ParseError("only one relational operator is allowed", peek().pos);
    }
    expect(Tok::End, "end of input");
    return RelConstraint{std::move(left), rel, std::move(right)};
  }

  ArithExpr expr() {
    ArithExpr e = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      ArithOp op = advance().kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub;
      e = ArithExpr::binary(op, std::move(e), term());
    }
    return e;
  }

  ArithExpr term() {
    ArithExpr e = factor();
    while (peek().kind == Tok::Star) {
      advance();
      e = ArithExpr::binary(ArithOp::Mul, std::move(e), factor());
    }
    return e;
  }

  ArithExpr factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
        advance();
        return ArithExpr::constant(t.value);
      case Tok::Minus:
        advance();
        if (peek().kind == Tok::Int) return ArithExpr::constant(-advance().value);
        return ArithExpr::binary(ArithOp::Mul, ArithExpr::constant(-1), factor());
      case Tok::Ident:
        if (peek(1).kind == Tok::LParen) {
          throw ParseError("function '" + std::string(t.text) + "' cannot appear in an expression",
                           t.pos);
        }
        return ArithExpr::cell(cell());
      case Tok::LParen: {
        advance();
        ArithExpr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      default:
        throw ParseError("expected expression, found " + describe(t), t.pos);
    }
  }

  std::vector<Token> tokens_;
  std::size_t at_ = 0;
};

inline std::string render_expr(const ArithExpr& e, int parent_prec, bool right_side) {
  switch (e.kind()) {
    case ArithExpr::Kind::Const: return std::to_string(e.value());
    case ArithExpr::Kind::Cell: return format_cell_ref(e.cell_ref());
    case ArithExpr::Kind::Binary: break;
  }
  int prec = e.op() == ArithOp::Mul ? 2 : 1;
  std::string s = render_expr(e.lhs(), prec, false) + std::string(to_string(e.op())) +
                  render_expr(e.rhs(), prec, true);
  // Left-associative: an equal-precedence right operand needs parentheses.
  if (prec < parent_prec || (prec == parent_prec && right_side)) return "(" + s + ")";
  return s;
}

inline std::string render_rhs(const RhsSpec& rhs) {
  if (const auto* s = std::get_if<Scalar>(&rhs)) return std::to_string(s->value);
  if (const auto* l = std::get_if<IntList>(&rhs)) return render_int_list(l->values);
  return format_range(std::get<CellRange>(rhs));
}

inline std::string_view all_different_name(Orientation o) {
  switch (o) {
    case Orientation::All: return "ssAllDifferent";
    case Orientation::Rows: return "ssRowsAllDifferent";
    case Orientation::Cols: return "ssColsAllDifferent";
    case Orientation::Diag: return "ssDiagonalsAllDifferent";
    case Orientation::BackDiag: return "ssBackDiagonalsAllDifferent";
  }
  return "";
}

inline std::string_view aggregate_name(Orientation o) {
  switch (o) {
    case Orientation::Rows: return "ssRowsAggregate";
    case Orientation::Cols: return "ssColsAggregate";
    case Orientation::Diag: return "ssDiagonalAggregate";
    case Orientation::BackDiag: return "ssBackDiagonalAggregate";
    case Orientation::All: break;
  }
  return "";
}

}  // namespace detail

/// Parses one SSCL constraint: an `ss*` call (name case-insensitive) or a
/// free-form relation like `A1+4 #< B2`.
inline Constraint parse_constraint(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ParseError("empty constraint", 0);
  }
  return detail::Parser(text).constraint();
}

/// Canonical text; parse_constraint(render(c)) == c.
inline std::string render(const Constraint& c) {
  using detail::render_rhs;
  struct Visitor {
    std::string operator()(const Domain& d) const {
      std::string out = "ssDomain(" + format_range_list(d.range) + ", ";
      if (const auto* iv = std::get_if<IntervalDom>(&d.dom)) {
        return out + std::to_string(iv->lo) + ", " + std::to_string(iv->hi) + ")";
      }
      return out + render_int_list(std::get<ListDom>(d.dom).values) + ")";
    }
    std::string operator()(const AllDifferent& a) const {
      return std::string(detail::all_different_name(a.orientation)) + "(" + format_range(a.range) +
             ")";
    }
    std::string operator()(const Aggregate& a) const {
      return std::string(detail::aggregate_name(a.orientation)) + "(" +
             std::string(to_string(a.op)) + ", " + format_range(a.range) + ", " +
             std::string(to_string(a.rel)) + ", " + render_rhs(a.rhs) + ")";
    }
    std::string operator()(const PairsOp& p) const {
      return "ssPairsOp(" + format_range(p.lhs) + ", " + std::string(to_string(p.op)) + ", " +
             format_range(p.mid) + ", " + std::string(to_string(p.rel)) + ", " +
             render_rhs(p.rhs) + ")";
    }
    std::string operator()(const NthElement& n) const {
      std::string index = std::holds_alternative<CellRef>(n.index)
                              ? format_cell_ref(std::get<CellRef>(n.index))
                              : std::to_string(std::get<std::int64_t>(n.index));
      return "ssNthElement(" + index + ", " + render_rhs(n.list) + ", " +
             format_cell_ref(n.value) + ")";
    }
    std::string operator()(const Minimize& m) const {
      return "ssMin(" + format_cell_ref(m.var) + ")";
    }
    std::string operator()(const Maximize& m) const {
      return "ssMax(" + format_cell_ref(m.var) + ")";
    }
    std::string operator()(const VarRange& v) const {
      return "ssVarRange(" + format_range_list(v.range) + ")";
    }
    std::string operator()(const ConstraintRange& v) const {
      return "ssConstraintRange(" + format_range_list(v.range) + ")";
    }
    std::string operator()(const RelConstraint& r) const {
      return detail::render_expr(r.left, 0, false) + " " + std::string(to_string(r.rel)) + " " +
             detail::render_expr(r.right, 0, false);
    }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace sscl

inline std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Integer literal, then domain literal, then constraint formula.
/// Blank text yields EmptyCell.
inline CellContent classify_input(std::string_view text) {
  std::string_view body = trim(text);
  if (body.empty()) return EmptyCell{};
  // Positions are reported relative to the untrimmed text.
  const std::size_t lead = static_cast<std::size_t>(body.data() - text.data());
  try {
    sscl::detail::Parser probe(body);
    if (auto v = probe.whole_integer()) return IntValue{*v};
    if (auto d = probe.domain_literal()) return DomainLiteral{*d};
    return Formula{sscl::parse_constraint(body), std::string(text)};
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.position() + lead);
  }
}

}  // namespace csee
