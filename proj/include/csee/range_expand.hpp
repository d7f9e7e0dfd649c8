#pragma once

#include <vector>

#include "csee/cell_ref.hpp"

namespace csee {

using CellList = std::vector<CellRef>;
using CellGroups = std::vector<CellList>;

/// Row-major: rows top to bottom, columns left to right within a row.
inline CellList var_list(const CellRange& r) {
  CellList out;
  out.reserve(static_cast<std::size_t>(r.rows()) * static_cast<std::size_t>(r.cols()));
  for (int row = r.top_left.row; row <= r.bottom_right.row; ++row) {
    for (int col = r.top_left.col; col <= r.bottom_right.col; ++col) out.push_back({col, row});
  }
  return out;
}

inline CellList var_list(CellRef ref) { return {ref}; }

inline CellList var_list(const RangeItem& item) {
  return std::visit([](const auto& x) { return var_list(x); }, item);
}

/// Item expansions concatenated in order; duplicates are kept.
inline CellList var_list(const RangeList& list) {
  CellList out;
  for (const auto& item : list.items) {
    auto part = var_list(item);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

inline CellGroups var_list_by_row(const CellRange& r) {
  CellGroups groups;
  for (int row = r.top_left.row; row <= r.bottom_right.row; ++row) {
    CellList g;
    for (int col = r.top_left.col; col <= r.bottom_right.col; ++col) g.push_back({col, row});
    groups.push_back(std::move(g));
  }
  return groups;
}

inline CellGroups var_list_by_col(const CellRange& r) {
  CellGroups groups;
  for (int col = r.top_left.col; col <= r.bottom_right.col; ++col) {
    CellList g;
    for (int row = r.top_left.row; row <= r.bottom_right.row; ++row) g.push_back({col, row});
    groups.push_back(std::move(g));
  }
  return groups;
}

/// Groups of constant (row - col), starting at the bottom-left corner;
/// each group runs down-right.
inline CellGroups var_list_by_diag(const CellRange& r) {
  CellGroups groups;
  const int rows = r.rows();
  const int cols = r.cols();
  // Relative offset k = row - col spans rows-1 down to -(cols-1).
  for (int k = rows - 1; k >= -(cols - 1); --k) {
    CellList g;
    for (int c = std::max(0, -k); c < cols && c + k < rows; ++c) {
      g.push_back({r.top_left.col + c, r.top_left.row + c + k});
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

/// Groups of constant (row + col), starting at the top-left corner; each
/// group runs up-right.
inline CellGroups var_list_by_back_diag(const CellRange& r) {
  CellGroups groups;
  const int rows = r.rows();
  const int cols = r.cols();
  for (int s = 0; s <= rows + cols - 2; ++s) {
    CellList g;
    for (int c = std::max(0, s - (rows - 1)); c < cols && c <= s; ++c) {
      g.push_back({r.top_left.col + c, r.top_left.row + s - c});
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace csee
