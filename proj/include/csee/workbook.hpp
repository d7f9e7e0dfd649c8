#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csee/cell_ref.hpp"
#include "csee/sscl_parser.hpp"
#include "csee/types.hpp"

namespace csee {

/// Parse failure attributed to one cell.
class CellError : public Error {
 public:
  CellError(CellRef cell, std::string message, std::size_t position)
      : Error(format_cell_ref(cell) + ": " + message + " (at position " +
              std::to_string(position) + ")"),
        cell_(cell),
        message_(std::move(message)),
        position_(position) {}

  CellRef cell() const noexcept { return cell_; }
  const std::string& detail() const noexcept { return message_; }
  std::size_t position() const noexcept { return position_; }

 private:
  CellRef cell_;
  std::string message_;
  std::size_t position_;
};

/// Every cell-level failure found while loading a workbook, plus
/// document-level problems (bad JSON, bad keys) in `messages`.
class WorkbookError : public Error {
 public:
  WorkbookError(std::vector<CellError> cells, std::vector<std::string> messages)
      : Error(summary(cells, messages)), cells_(std::move(cells)), messages_(std::move(messages)) {}

  const std::vector<CellError>& cell_errors() const noexcept { return cells_; }
  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  static std::string summary(const std::vector<CellError>& cells,
                             const std::vector<std::string>& messages) {
    if (!messages.empty()) return messages.front();
    if (!cells.empty()) return cells.front().what();
    return "invalid workbook";
  }

  std::vector<CellError> cells_;
  std::vector<std::string> messages_;
};

struct Cell {
  std::string input;
  CellContent content;
  friend bool operator==(const Cell&, const Cell&) = default;
};

using CellMap = std::map<CellRef, Cell>;

/// Sparse grid of classified cell inputs. Absent keys are empty; an empty
/// input removes the key.
class Workbook {
 public:
  Workbook() = default;
  explicit Workbook(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Classifies `input` and stores it. Throws CellError.
  void set(CellRef ref, std::string_view input) {
    CellContent content;
    try {
      content = classify_input(input);
    } catch (const ParseError& e) {
      throw CellError(ref, e.detail(), e.position());
    }
    if (std::holds_alternative<EmptyCell>(content)) {
      cells_.erase(ref);
      return;
    }
    cells_[ref] = Cell{std::string(input), std::move(content)};
  }

  void set_value(CellRef ref, std::int64_t value) {
    cells_[ref] = Cell{std::to_string(value), IntValue{value}};
  }

  const CellContent& content(CellRef ref) const {
    static const CellContent empty = EmptyCell{};
    auto it = cells_.find(ref);
    return it == cells_.end() ? empty : it->second.content;
  }

  std::string input(CellRef ref) const {
    auto it = cells_.find(ref);
    return it == cells_.end() ? std::string() : it->second.input;
  }

  const CellMap& cells() const { return cells_; }

  void snapshot() { original_ = cells_; }

  void restore() {
    if (!original_) throw Error("no snapshot to restore");
    cells_ = *original_;
  }

  bool has_snapshot() const { return original_.has_value(); }
  const std::optional<CellMap>& original() const { return original_; }

  friend bool operator==(const Workbook&, const Workbook&) = default;

 private:
  std::string name_;
  CellMap cells_;
  std::optional<CellMap> original_;
};

inline Workbook set_cell(Workbook wb, CellRef ref, std::string_view input) {
  wb.set(ref, input);
  return wb;
}

inline Workbook snapshot(Workbook wb) {
  wb.snapshot();
  return wb;
}

inline Workbook restore(Workbook wb) {
  wb.restore();
  return wb;
}

/// {"name": ..., "cells": {"A1": "0..1", ...}} with keys in row-major order.
inline nlohmann::ordered_json to_json(const Workbook& wb) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::object();
  for (const auto& [ref, cell] : wb.cells()) cells[format_cell_ref(ref)] = cell.input;
  nlohmann::ordered_json out;
  out["name"] = wb.name();
  out["cells"] = std::move(cells);
  return out;
}

inline Workbook workbook_from_json(const nlohmann::json& j) {
  std::vector<CellError> cell_errors;
  std::vector<std::string> messages;
  Workbook wb;
  if (!j.is_object()) throw WorkbookError({}, {"workbook JSON must be an object"});
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) throw WorkbookError({}, {"\"name\" must be a string"});
    wb.set_name(it->get<std::string>());
  }
  auto cells = j.find("cells");
  if (cells == j.end() || !cells->is_object()) {
    throw WorkbookError({}, {"\"cells\" must be an object"});
  }
  for (const auto& [key, value] : cells->items()) {
    CellRef ref;
    try {
      ref = parse_cell_ref(trim(key));
    } catch (const ParseError& e) {
      messages.push_back("invalid cell key '" + key + "': " + e.detail());
      continue;
    }
    std::string input;
    if (value.is_string()) {
      input = value.get<std::string>();
    } else if (value.is_number_integer()) {
      input = std::to_string(value.get<std::int64_t>());
    } else {
      messages.push_back(format_cell_ref(ref) + ": cell value must be a string or integer");
      continue;
    }
    try {
      wb.set(ref, input);
    } catch (const CellError& e) {
      cell_errors.push_back(e);
    }
  }
  if (!cell_errors.empty() || !messages.empty()) {
    throw WorkbookError(std::move(cell_errors), std::move(messages));
  }
  return wb;
}

inline Workbook parse_workbook(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw WorkbookError({}, {std::string("malformed JSON: ") + e.what()});
  }
  return workbook_from_json(j);
}

inline std::string dump_workbook(const Workbook& wb) { return to_json(wb).dump(2) + "\n"; }

inline Workbook load_workbook(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_workbook(buf.str());
}

inline void save_workbook(const Workbook& wb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << dump_workbook(wb);
}

}  // namespace csee
