#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csee/types.hpp"

namespace csee {

inline constexpr int kMaxColumn = 256;   // "IV"
inline constexpr int kMaxRow = 65536;

/// A1-style grid coordinate, both indices 1-based. Orders row-major.
struct CellRef {
  int col = 1;
  int row = 1;

  friend bool operator==(const CellRef&, const CellRef&) = default;
  friend std::strong_ordering operator<=>(const CellRef& a, const CellRef& b) {
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.col <=> b.col;
  }
};

/// Rectangle with top_left.col <= bottom_right.col and top_left.row <= bottom_right.row.
struct CellRange {
  CellRef top_left;
  CellRef bottom_right;

  int rows() const { return bottom_right.row - top_left.row + 1; }
  int cols() const { return bottom_right.col - top_left.col + 1; }
  bool contains(CellRef c) const {
    return c.col >= top_left.col && c.col <= bottom_right.col && c.row >= top_left.row &&
           c.row <= bottom_right.row;
  }
  friend bool operator==(const CellRange&, const CellRange&) = default;
};

using RangeItem = std::variant<CellRef, CellRange>;

/// Non-empty ordered list of refs and ranges, e.g. [A1:C3,E6:F9,G10].
struct RangeList {
  std::vector<RangeItem> items;
  friend bool operator==(const RangeList&, const RangeList&) = default;
};

inline std::string format_column(int col) {
  std::string letters;
  while (col > 0) {
    int rem = (col - 1) % 26;
    letters.insert(letters.begin(), static_cast<char>('A' + rem));
    col = (col - 1) / 26;
  }
  return letters;
}

inline std::string format_cell_ref(CellRef ref) {
  return format_column(ref.col) + std::to_string(ref.row);
}

inline std::string format_range(const CellRange& r) {
  return format_cell_ref(r.top_left) + ":" + format_cell_ref(r.bottom_right);
}

inline std::string format_range_item(const RangeItem& item) {
  if (const auto* ref = std::get_if<CellRef>(&item)) return format_cell_ref(*ref);
  return format_range(std::get<CellRange>(item));
}

/// Single item without brackets, several as "[A1:C3,E6:F9,G10]".
inline std::string format_range_list(const RangeList& list) {
  if (list.items.size() == 1) return format_range_item(list.items.front());
  std::string out = "[";
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    if (i) out += ',';
    out += format_range_item(list.items[i]);
  }
  return out + "]";
}

/// Parses "A1".."IV65536", case-insensitive. `offset` shifts reported
/// error positions when the reference is embedded in a larger text.
inline CellRef parse_cell_ref(std::string_view text, std::size_t offset = 0) {
  const std::string shown(text);
  if (text.empty()) throw ParseError("empty cell reference", offset);
  std::size_t i = 0;
  std::int64_t col = 0;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    col = col * 26 + (std::toupper(static_cast<unsigned char>(text[i])) - 'A' + 1);
    if (col > kMaxColumn) throw ParseError("column beyond IV in '" + shown + "'", offset);
    ++i;
  }
  if (i == 0) throw ParseError("malformed cell reference '" + shown + "'", offset);
  std::size_t digits = i;
  std::int64_t row = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    row = row * 10 + (text[i] - '0');
    if (row > kMaxRow) throw ParseError("row outside 1..65536 in '" + shown + "'", offset + digits);
    ++i;
  }
  if (i == digits || i != text.size()) {
    throw ParseError("malformed cell reference '" + shown + "'", offset + i);
  }
  if (row < 1) throw ParseError("row outside 1..65536 in '" + shown + "'", offset + digits);
  return CellRef{static_cast<int>(col), static_cast<int>(row)};
}

inline CellRange make_range(CellRef top_left, CellRef bottom_right, std::size_t position = 0) {
  if (bottom_right.col < top_left.col || bottom_right.row < top_left.row) {
    throw ParseError("inverted range " + format_cell_ref(top_left) + ":" +
                         format_cell_ref(bottom_right),
                     position);
  }
  return CellRange{top_left, bottom_right};
}

namespace detail {

struct RangeScanner {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  CellRef ref() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isalnum(static_cast<unsigned char>(text[pos]))) ++pos;
    return parse_cell_ref(text.substr(start, pos - start), start);
  }
  RangeItem item() {
    skip_ws();
    std::size_t start = pos;
    CellRef first = ref();
    if (!eat(':')) return first;
    return make_range(first, ref(), start);
  }
};

}  // namespace detail

/// "A1", "A1:H8", or "[A1:C3, E6:F9, G10]".
inline RangeList parse_range_list(std::string_view text) {
  detail::RangeScanner s{text};
  RangeList list;
  if (s.eat('[')) {
    do {
      list.items.push_back(s.item());
    } while (s.eat(','));
    if (!s.eat(']')) throw ParseError("expected ']' in range list", s.pos);
  } else {
    list.items.push_back(s.item());
  }
  s.skip_ws();
  if (s.pos != text.size()) throw ParseError("unexpected text after range list", s.pos);
  return list;
}

}  // namespace csee
