#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace csee {

/// Base of every error the engine raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text. `position` is the 0-based character offset into the
/// text that was being parsed.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"),
        message_(std::move(message)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& detail() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t position_;
};

enum class RelOp { Eq, Neq, Lt, Le, Gt, Ge };

/// Sub only occurs inside free-form expressions; aggregation accepts Add and Mul.
enum class ArithOp { Add, Sub, Mul };

inline std::string_view to_string(RelOp op) {
  switch (op) {
    case RelOp::Eq: return "#=";
    case RelOp::Neq: return "#\\=";
    case RelOp::Lt: return "#<";
    case RelOp::Le: return "#=<";
    case RelOp::Gt: return "#>";
    case RelOp::Ge: return "#>=";
  }
  return "?";
}

inline std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
  }
  return "?";
}

/// Integer comparison `lhs op rhs`.
template <class T>
constexpr bool holds(T lhs, RelOp op, T rhs) {
  switch (op) {
    case RelOp::Eq: return lhs == rhs;
    case RelOp::Neq: return lhs != rhs;
    case RelOp::Lt: return lhs < rhs;
    case RelOp::Le: return lhs <= rhs;
    case RelOp::Gt: return lhs > rhs;
    case RelOp::Ge: return lhs >= rhs;
  }
  return false;
}

struct IntervalDom {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend bool operator==(const IntervalDom&, const IntervalDom&) = default;
};

/// Strictly ascending, non-empty. Build with make_list_dom().
struct ListDom {
  std::vector<std::int64_t> values;
  friend bool operator==(const ListDom&, const ListDom&) = default;
};

using DomainSpec = std::variant<IntervalDom, ListDom>;

/// Sorts and deduplicates. Throws Error on an empty list.
inline ListDom make_list_dom(std::vector<std::int64_t> values) {
  if (values.empty()) throw Error("empty domain list");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return ListDom{std::move(values)};
}

inline IntervalDom make_interval_dom(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) {
    throw Error("empty domain interval " + std::to_string(lo) + ".." + std::to_string(hi));
  }
  return IntervalDom{lo, hi};
}

inline std::string render_int_list(const std::vector<std::int64_t>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out + "]";
}

/// Cell-literal spelling: "2..5" or "[2,5,7]".
inline std::string render_domain(const DomainSpec& d) {
  if (const auto* iv = std::get_if<IntervalDom>(&d)) {
    return std::to_string(iv->lo) + ".." + std::to_string(iv->hi);
  }
  return render_int_list(std::get<ListDom>(d).values);
}

}  // namespace csee
