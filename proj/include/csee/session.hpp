#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csee/compiler.hpp"
#include "csee/fd/solver.hpp"
#include "csee/workbook.hpp"

namespace csee {

enum class SolveStatus { Sat, Unsat, Optimal, BudgetExceeded, Error };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "Sat";
    case SolveStatus::Unsat: return "Unsat";
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::BudgetExceeded: return "BudgetExceeded";
    case SolveStatus::Error: return "Error";
  }
  return "?";
}

struct SolveReport {
  SolveStatus status = SolveStatus::Error;
  /// Exact when `exhausted`, otherwise a lower bound.
  std::uint64_t count = 0;
  bool exhausted = false;
  std::optional<std::int64_t> objective;
  std::chrono::milliseconds elapsed{0};
  std::uint64_t nodes = 0;
  std::vector<CompileError> errors;
  std::string error;
};

struct SolveOptions {
  std::uint64_t node_budget = fd::kDefaultNodeBudget;
  /// Solutions enumerated up front; nullopt drains the search.
  std::optional<std::uint64_t> limit;
};

class SolutionIndexError : public Error {
 public:
  using Error::Error;
};

/// One workbook and its solve state: a lazily extended cache of solutions
/// in deterministic order, and a cursor over them. With an objective the
/// cache holds the optimal-value solutions.
class SolveSession {
 public:
  explicit SolveSession(Workbook wb) : original_(std::move(wb)), display_(original_) {}

  /// Current inputs (never overwritten by solutions).
  const Workbook& workbook() const { return original_; }
  /// Inputs with the selected solution applied, if any.
  const Workbook& display() const { return display_; }
  const std::optional<SolveReport>& report() const { return report_; }
  const std::optional<CompiledModel>& compiled() const { return compiled_; }
  std::optional<std::size_t> index() const { return index_; }
  std::size_t cached() const { return cache_.size(); }
  bool exhausted() const { return exhausted_; }

  /// Edits an input cell; clears any solve state. Throws CellError.
  void set_cell(CellRef ref, std::string_view input) {
    original_.set(ref, input);
    reset();
  }

  SolveReport solve(const SolveOptions& options = {}) {
    reset();
    const auto start = std::chrono::steady_clock::now();
    SolveReport r;
    fd::SearchOptions search_options{options.node_budget};
    try {
      compiled_ = compile(original_);
      fd::Model model = compiled_->model;
      if (model.objective) {
        std::uint64_t nodes = 0;
        auto best = fd::optimize(model, search_options, &nodes);
        r.nodes += nodes;
        if (!best) {
          r.status = SolveStatus::Unsat;
          r.exhausted = true;
          exhausted_ = true;
          return finish(std::move(r), start);
        }
        const std::int64_t value = (*best)[model.objective->var];
        r.status = SolveStatus::Optimal;
        r.objective = value;
        model.set_domain(model.objective->var, fd::Domain::singleton(value));
      }
      search_ = std::make_unique<fd::Search>(std::move(model), search_options);
      budget_nodes_ = r.nodes;
      const std::uint64_t want = options.limit.value_or(UINT64_MAX);
      while (cache_.size() < want && extend()) {
      }
      r.count = cache_.size();
      r.exhausted = exhausted_;
      if (r.status != SolveStatus::Optimal) {
        r.status = cache_.empty() ? SolveStatus::Unsat : SolveStatus::Sat;
      }
    } catch (const CompileFailure& e) {
      r.status = SolveStatus::Error;
      r.errors = e.errors();
      r.error = e.what();
      compiled_.reset();
      return finish(std::move(r), start);
    } catch (const fd::BudgetExceeded& e) {
      r.count = cache_.size();
      r.exhausted = false;
      r.error = e.what();
      if (cache_.empty()) r.status = SolveStatus::BudgetExceeded;
      else if (r.status != SolveStatus::Optimal) r.status = SolveStatus::Sat;
    } catch (const fd::ModelError& e) {
      r.status = SolveStatus::Error;
      r.error = e.what();
      return finish(std::move(r), start);
    }
    r.nodes = budget_nodes_ + (search_ ? search_->nodes() : 0);
    if (!cache_.empty()) select(0);
    return finish(std::move(r), start);
  }

  /// Applies solution `i`, extending the cache as needed. Throws
  /// SolutionIndexError when `i` is beyond the solution set, and
  /// fd::BudgetExceeded when the search budget runs out first.
  const Workbook& goto_solution(std::size_t i) {
    if (!compiled_ || !report_ ||
        (report_->status != SolveStatus::Sat && report_->status != SolveStatus::Optimal)) {
      throw SolutionIndexError("no solutions available");
    }
    while (cache_.size() <= i && extend()) {
    }
    report_->count = std::max<std::uint64_t>(report_->count, cache_.size());
    report_->exhausted = exhausted_;
    if (i >= cache_.size()) {
      throw SolutionIndexError("solution index " + std::to_string(i) + " out of range (" +
                               std::to_string(cache_.size()) + " solutions)");
    }
    select(i);
    return display_;
  }

  const Workbook& next() { return goto_solution(index_ ? *index_ + 1 : 0); }

  const Workbook& prev() {
    if (!index_ || *index_ == 0) throw SolutionIndexError("already at the first solution");
    return goto_solution(*index_ - 1);
  }

  /// Drops solve state; the display returns to the original inputs.
  const Workbook& reset() {
    compiled_.reset();
    search_.reset();
    cache_.clear();
    exhausted_ = false;
    index_.reset();
    report_.reset();
    budget_nodes_ = 0;
    display_ = original_;
    return display_;
  }

  const fd::Solution& solution(std::size_t i) const { return cache_.at(i); }

 private:
  bool extend() {
    if (exhausted_ || !search_) return false;
    auto s = search_->next();
    if (!s) {
      exhausted_ = true;
      return false;
    }
    cache_.push_back(std::move(*s));
    return true;
  }

  void select(std::size_t i) {
    index_ = i;
    display_ = apply_solution(original_, *compiled_, cache_[i]);
  }

  SolveReport finish(SolveReport r, std::chrono::steady_clock::time_point start) {
    r.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    report_ = r;
    return r;
  }

  Workbook original_;
  Workbook display_;
  std::optional<CompiledModel> compiled_;
  std::unique_ptr<fd::Search> search_;
  std::vector<fd::Solution> cache_;
  bool exhausted_ = false;
  std::optional<std::size_t> index_;
  std::optional<SolveReport> report_;
  std::uint64_t budget_nodes_ = 0;
};

}  // namespace csee
