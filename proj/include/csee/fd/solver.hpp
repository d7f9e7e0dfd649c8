#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csee/fd/domain.hpp"
#include "csee/fd/model.hpp"

namespace csee::fd {

/// Raised when search visits more nodes than its budget allows.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(std::uint64_t nodes)
      : Error("search budget exceeded after " + std::to_string(nodes) + " nodes"),
        nodes_(nodes) {}
  std::uint64_t nodes() const noexcept { return nodes_; }

 private:
  std::uint64_t nodes_;
};

inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

struct SearchOptions {
  std::uint64_t node_budget = kDefaultNodeBudget;
};

/// Domains with a trail for backtracking. Mutators return false when a
/// domain wipes out.
class Store {
 public:
  explicit Store(std::vector<Domain> domains)
      : doms_(std::move(domains)), saved_level_(doms_.size(), 0), dirty_(doms_.size(), 0) {}

  const Domain& operator[](VarId v) const { return doms_[v.index]; }
  const std::vector<Domain>& domains() const { return doms_; }
  std::size_t size() const { return doms_.size(); }

  bool restrict_min(VarId v, std::int64_t lo) {
    if (lo <= doms_[v.index].min()) return true;
    return apply(v, [lo](Domain& d) { return d.restrict_min(lo); });
  }
  bool restrict_max(VarId v, std::int64_t hi) {
    if (hi >= doms_[v.index].max()) return true;
    return apply(v, [hi](Domain& d) { return d.restrict_max(hi); });
  }
  /// Bounds given as 128-bit values so callers need not clamp.
  bool restrict_bounds(VarId v, __int128 lo, __int128 hi) {
    const Domain& d = doms_[v.index];
    if (lo > d.max() || hi < d.min()) return wipe(v);
    if (lo > d.min() && !restrict_min(v, static_cast<std::int64_t>(lo))) return false;
    if (hi < doms_[v.index].max() && !restrict_max(v, static_cast<std::int64_t>(hi))) return false;
    return true;
  }
  bool remove(VarId v, std::int64_t value) {
    if (!doms_[v.index].contains(value)) return true;
    return apply(v, [value](Domain& d) { return d.remove(value); });
  }
  bool assign(VarId v, std::int64_t value) {
    return apply(v, [value](Domain& d) { return d.assign(value); });
  }
  bool intersect(VarId v, const Domain& other) {
    return apply(v, [&other](Domain& d) { return d.intersect(other); });
  }

  /// Starts a new backtrack level; returns the mark to undo to.
  std::size_t mark() {
    ++level_;
    return trail_.size();
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      Entry& e = trail_.back();
      doms_[e.var] = std::move(e.dom);
      saved_level_[e.var] = e.saved_level;
      trail_.pop_back();
    }
    ++level_;
    clear_dirty();
  }

  /// Variables modified since the last call.
  std::vector<std::uint32_t> take_dirty() {
    std::vector<std::uint32_t> out;
    out.swap(dirty_list_);
    for (auto v : out) dirty_[v] = 0;
    return out;
  }

  std::uint64_t modifications() const { return modifications_; }

 private:
  struct Entry {
    std::uint32_t var;
    Domain dom;
    std::uint64_t saved_level;
  };

  template <class F>
  bool apply(VarId v, F&& f) {
    const std::uint32_t i = v.index;
    if (saved_level_[i] != level_) {
      trail_.push_back({i, doms_[i], saved_level_[i]});
      saved_level_[i] = level_;
    }
    if (f(doms_[i])) {
      ++modifications_;
      if (!dirty_[i]) {
        dirty_[i] = 1;
        dirty_list_.push_back(i);
      }
    }
    return !doms_[i].empty();
  }

  bool wipe(VarId v) {
    return apply(v, [](Domain& d) {
      d = Domain();
      return true;
    });
  }

  void clear_dirty() {
    for (auto v : dirty_list_) dirty_[v] = 0;
    dirty_list_.clear();
  }

  std::vector<Domain> doms_;
  std::vector<Entry> trail_;
  std::vector<std::uint64_t> saved_level_;
  std::vector<char> dirty_;
  std::vector<std::uint32_t> dirty_list_;
  std::uint64_t level_ = 1;
  std::uint64_t modifications_ = 0;
};

namespace detail {

inline __int128 floor_div(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline __int128 ceil_div(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual std::vector<VarId> vars() const = 0;
  /// Narrows domains; false on failure.
  virtual bool propagate(Store& s) = 0;
};

/// Bounds-consistent sum(a_i x_i) rel c. Disequality prunes only when a
/// single variable remains unfixed.
class LinearPropagator final : public Propagator {
 public:
  explicit LinearPropagator(const LinearRel& c) : terms_(c.terms), constant_(c.constant) {
    switch (c.rel) {
      case RelOp::Eq: mode_ = Mode::Eq; break;
      case RelOp::Neq: mode_ = Mode::Neq; break;
      case RelOp::Le: mode_ = Mode::Le; break;
      case RelOp::Lt:
        mode_ = Mode::Le;
        constant_ -= 1;
        break;
      case RelOp::Ge: negate(); break;
      case RelOp::Gt:
        negate();
        constant_ -= 1;
        break;
    }
  }

  std::vector<VarId> vars() const override {
    std::vector<VarId> out;
    for (const auto& t : terms_) out.push_back(t.var);
    return out;
  }

  bool propagate(Store& s) override {
    switch (mode_) {
      case Mode::Le: return upper(s, 1);
      case Mode::Neq: return diseq(s);
      case Mode::Eq:
        for (;;) {
          auto before = s.modifications();
          if (!upper(s, 1) || !upper(s, -1)) return false;
          if (s.modifications() == before) return true;
        }
    }
    return true;
  }

 private:
  enum class Mode { Le, Eq, Neq };

  void negate() {
    mode_ = Mode::Le;
    for (auto& t : terms_) t.coef = -t.coef;
    constant_ = -constant_;
  }

  /// sign * (sum a_i x_i) <= sign * c
  bool upper(Store& s, int sign) {
    const __int128 bound = static_cast<__int128>(sign) * constant_;
    __int128 min_sum = 0;
    for (const auto& t : terms_) min_sum += term_min(s, sign * t.coef, t.var);
    if (min_sum > bound) return false;
    for (const auto& t : terms_) {
      const __int128 a = static_cast<__int128>(sign) * t.coef;
      if (a == 0) continue;
      const __int128 slack = bound - (min_sum - term_min(s, a, t.var));
      if (a > 0) {
        __int128 hi = floor_div(slack, a);
        if (hi < s[t.var].max() && !s.restrict_bounds(t.var, s[t.var].min(), hi)) return false;
      } else {
        __int128 lo = ceil_div(slack, a);
        if (lo > s[t.var].min() && !s.restrict_bounds(t.var, lo, s[t.var].max())) return false;
      }
    }
    return true;
  }

  static __int128 term_min(const Store& s, __int128 a, VarId v) {
    return a >= 0 ? a * s[v].min() : a * s[v].max();
  }

  bool diseq(Store& s) {
    __int128 fixed_sum = 0;
    const LinearTerm* open = nullptr;
    for (const auto& t : terms_) {
      if (t.coef == 0) continue;
      if (s[t.var].fixed()) {
        fixed_sum += static_cast<__int128>(t.coef) * s[t.var].value();
      } else if (open) {
        return true;
      } else {
        open = &t;
      }
    }
    const __int128 rest = static_cast<__int128>(constant_) - fixed_sum;
    if (!open) return rest != 0;
    if (rest % open->coef != 0) return true;
    const __int128 v = rest / open->coef;
    if (v < s[open->var].min() || v > s[open->var].max()) return true;
    return s.remove(open->var, static_cast<std::int64_t>(v));
  }

  std::vector<LinearTerm> terms_;
  std::int64_t constant_;
  Mode mode_ = Mode::Le;
};

class DiseqPropagator final : public Propagator {
 public:
  explicit DiseqPropagator(const Diseq& c) : a_(c.a), b_(c.b) {}
  std::vector<VarId> vars() const override { return {a_, b_}; }
  bool propagate(Store& s) override {
    if (a_ == b_) return false;
    if (s[a_].fixed() && !s.remove(b_, s[a_].value())) return false;
    if (s[b_].fixed() && !s.remove(a_, s[b_].value())) return false;
    return true;
  }

 private:
  VarId a_, b_;
};

/// Bounds-consistent x * y = z.
class MulPropagator final : public Propagator {
 public:
  explicit MulPropagator(const Mul& c) : x_(c.x), y_(c.y), z_(c.z) {}
  std::vector<VarId> vars() const override { return {x_, y_, z_}; }

  bool propagate(Store& s) override {
    for (;;) {
      auto before = s.modifications();
      if (!narrow_product(s)) return false;
      if (!narrow_factor(s, x_, y_) || !narrow_factor(s, y_, x_)) return false;
      if (s.modifications() == before) return true;
    }
  }

 private:
  bool narrow_product(Store& s) {
    const Domain& x = s[x_];
    const Domain& y = s[y_];
    __int128 c[4] = {static_cast<__int128>(x.min()) * y.min(),
                     static_cast<__int128>(x.min()) * y.max(),
                     static_cast<__int128>(x.max()) * y.min(),
                     static_cast<__int128>(x.max()) * y.max()};
    return s.restrict_bounds(z_, *std::min_element(c, c + 4), *std::max_element(c, c + 4));
  }

  /// target in z / other
  bool narrow_factor(Store& s, VarId target, VarId other) {
    if (s[z_].contains(0)) {
      if (s[other].contains(0)) return true;
    } else {
      if (!s.remove(other, 0) || !s.remove(target, 0)) return false;
    }
    const Domain& d = s[other];
    const std::int64_t zlo = s[z_].min();
    const std::int64_t zhi = s[z_].max();
    bool any = false;
    __int128 lo = 0, hi = 0;
    auto part = [&](std::int64_t plo, std::int64_t phi) {
      for (std::int64_t zc : {zlo, zhi}) {
        for (std::int64_t pc : {plo, phi}) {
          __int128 qlo = ceil_div(zc, pc);
          __int128 qhi = floor_div(zc, pc);
          if (!any) {
            lo = qlo;
            hi = qhi;
            any = true;
          } else {
            lo = std::min(lo, qlo);
            hi = std::max(hi, qhi);
          }
        }
      }
    };
    if (d.min() <= -1) part(d.min(), std::min<std::int64_t>(d.max(), -1));
    if (d.max() >= 1) part(std::max<std::int64_t>(d.min(), 1), d.max());
    if (!any) return true;
    return s.restrict_bounds(target, lo, hi);
  }

  VarId x_, y_, z_;
};

/// list[index] = value. Domain-consistent on index always and on value
/// when the reachable entries are constants; bounds otherwise.
class ElementPropagator final : public Propagator {
 public:
  explicit ElementPropagator(const Element& c) : c_(c) {}

  std::vector<VarId> vars() const override {
    std::vector<VarId> out;
    if (const auto* v = std::get_if<VarId>(&c_.index)) out.push_back(*v);
    for (const auto& o : c_.list) {
      if (const auto* v = std::get_if<VarId>(&o)) out.push_back(*v);
    }
    out.push_back(c_.value);
    return out;
  }

  bool propagate(Store& s) override {
    const auto n = static_cast<std::int64_t>(c_.list.size());
    std::vector<std::int64_t> indices;
    if (const auto* iv = std::get_if<VarId>(&c_.index)) {
      if (!s.restrict_bounds(*iv, 1, n)) return false;
      for (std::int64_t i : s[*iv].values()) {
        if (compatible(s, c_.list[static_cast<std::size_t>(i - 1)])) {
          indices.push_back(i);
        } else if (!s.remove(*iv, i)) {
          return false;
        }
      }
    } else {
      std::int64_t i = std::get<std::int64_t>(c_.index);
      if (i < 1 || i > n) return false;
      indices.push_back(i);
    }
    if (indices.empty()) return false;

    if (indices.size() == 1) {
      const Operand& entry = c_.list[static_cast<std::size_t>(indices.front() - 1)];
      if (const auto* ev = std::get_if<VarId>(&entry)) {
        if (!s.intersect(c_.value, s[*ev])) return false;
        return s.intersect(*ev, s[c_.value]);
      }
      return s.assign(c_.value, std::get<std::int64_t>(entry));
    }

    bool ground = true;
    std::vector<std::int64_t> values;
    __int128 lo = 0, hi = 0;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const Operand& entry = c_.list[static_cast<std::size_t>(indices[k] - 1)];
      std::int64_t elo, ehi;
      if (const auto* ev = std::get_if<VarId>(&entry)) {
        ground = false;
        elo = s[*ev].min();
        ehi = s[*ev].max();
      } else {
        elo = ehi = std::get<std::int64_t>(entry);
        values.push_back(elo);
      }
      lo = k == 0 ? elo : std::min<__int128>(lo, elo);
      hi = k == 0 ? ehi : std::max<__int128>(hi, ehi);
    }
    if (ground) return s.intersect(c_.value, Domain::from_values(values));
    return s.restrict_bounds(c_.value, lo, hi);
  }

 private:
  bool compatible(const Store& s, const Operand& entry) const {
    if (const auto* ev = std::get_if<VarId>(&entry)) return s[*ev].intersects(s[c_.value]);
    return s[c_.value].contains(std::get<std::int64_t>(entry));
  }

  Element c_;
};

inline std::unique_ptr<Propagator> make_propagator(const Constraint& c) {
  struct Visitor {
    std::unique_ptr<Propagator> operator()(const LinearRel& x) const {
      return std::make_unique<LinearPropagator>(x);
    }
    std::unique_ptr<Propagator> operator()(const Diseq& x) const {
      return std::make_unique<DiseqPropagator>(x);
    }
    std::unique_ptr<Propagator> operator()(const Mul& x) const {
      return std::make_unique<MulPropagator>(x);
    }
    std::unique_ptr<Propagator> operator()(const Element& x) const {
      return std::make_unique<ElementPropagator>(x);
    }
  };
  return std::visit(Visitor{}, c);
}

/// Store plus propagators, run to a fixpoint through a FIFO queue.
class Engine {
 public:
  explicit Engine(const Model& m) : store_(m.domains()), watchers_(m.num_vars()) {
    for (const auto& c : m.constraints()) {
      auto p = make_propagator(c);
      const auto id = static_cast<std::uint32_t>(props_.size());
      std::vector<VarId> vs = p->vars();
      std::sort(vs.begin(), vs.end());
      vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
      for (VarId v : vs) watchers_[v.index].push_back(id);
      props_.push_back(std::move(p));
    }
    queued_.assign(props_.size(), 0);
  }

  Store& store() { return store_; }
  const Store& store() const { return store_; }

  /// Runs every propagator, then reacts to changes until quiescent.
  bool fixpoint_all() {
    for (std::uint32_t i = 0; i < props_.size(); ++i) enqueue(i);
    return drain();
  }

  /// Reacts to the changes recorded since the last fixpoint.
  bool fixpoint() {
    schedule_dirty();
    return drain();
  }

 private:
  void enqueue(std::uint32_t p) {
    if (!queued_[p]) {
      queued_[p] = 1;
      queue_.push_back(p);
    }
  }

  void schedule_dirty() {
    for (auto v : store_.take_dirty()) {
      for (auto p : watchers_[v]) enqueue(p);
    }
  }

  bool drain() {
    std::size_t head = 0;
    bool ok = true;
    while (head < queue_.size()) {
      const auto p = queue_[head++];
      queued_[p] = 0;
      if (!props_[p]->propagate(store_)) {
        ok = false;
        break;
      }
      schedule_dirty();
    }
    for (std::size_t i = head; i < queue_.size(); ++i) queued_[queue_[i]] = 0;
    queue_.clear();
    if (!ok) store_.take_dirty();
    return ok;
  }

  Store store_;
  std::vector<std::unique_ptr<Propagator>> props_;
  std::vector<std::vector<std::uint32_t>> watchers_;
  std::vector<std::uint32_t> queue_;
  std::vector<char> queued_;
};

}  // namespace detail

/// Root propagation. Returns the narrowed domains, or nullopt when some
/// domain empties.
inline std::optional<std::vector<Domain>> propagate(const Model& m) {
  detail::Engine engine(m);
  if (!engine.fixpoint_all()) return std::nullopt;
  return engine.store().domains();
}

/// Depth-first enumeration. Variables are labeled in `label_order` (then
/// any remaining variables by id), values ascending, so solutions arrive
/// in lexicographic order of the labeled tuple. Resumable: each call to
/// next() continues where the previous one stopped.
class Search {
 public:
  explicit Search(Model model, SearchOptions options = {})
      : model_(std::move(model)), options_(options), engine_(model_) {
    std::vector<char> seen(model_.num_vars(), 0);
    for (VarId v : model_.label_order) {
      if (v.index < seen.size() && !seen[v.index]) {
        seen[v.index] = 1;
        order_.push_back(v);
      }
    }
    for (std::uint32_t i = 0; i < model_.num_vars(); ++i) {
      if (!seen[i]) order_.push_back(VarId{i});
    }
  }

  /// Next solution, or nullopt once the space is exhausted. Throws
  /// BudgetExceeded when the node budget runs out.
  std::optional<Solution> next() {
    if (over_budget_) throw BudgetExceeded(nodes_);
    if (done_) return std::nullopt;
    bool alive;
    if (!started_) {
      started_ = true;
      alive = apply_bound() && engine_.fixpoint_all();
    } else {
      alive = backtrack();
    }
    while (alive) {
      std::size_t pos = frames_.empty() ? 0 : frames_.back().pos + 1;
      while (pos < order_.size() && engine_.store()[order_[pos]].fixed()) ++pos;
      if (pos == order_.size()) return emit();
      const VarId var = order_[pos];
      const std::int64_t value = engine_.store()[var].min();
      frames_.push_back(Frame{pos, var, value, engine_.store().mark()});
      alive = try_value(var, value) || backtrack();
    }
    done_ = true;
    return std::nullopt;
  }

  /// Branch-and-bound: every later solution must strictly improve on
  /// `value` for the objective variable.
  void require_better(const Objective& obj, std::int64_t value) { bound_ = {obj, value}; }

  std::uint64_t nodes() const { return nodes_; }
  const Model& model() const { return model_; }

 private:
  struct Frame {
    std::size_t pos;
    VarId var;
    std::int64_t value;
    std::size_t mark;
  };

  bool try_value(VarId var, std::int64_t value) {
    if (++nodes_ > options_.node_budget) {
      over_budget_ = true;
      throw BudgetExceeded(nodes_);
    }
    return engine_.store().assign(var, value) && apply_bound() && engine_.fixpoint();
  }

  bool apply_bound() {
    if (!bound_) return true;
    const auto& [obj, value] = *bound_;
    Store& s = engine_.store();
    if (obj.direction == Direction::Minimize) return s.restrict_bounds(obj.var, s[obj.var].min(), static_cast<__int128>(value) - 1);
    return s.restrict_bounds(obj.var, static_cast<__int128>(value) + 1, s[obj.var].max());
  }

  /// Moves to the next untried value of the deepest open frame.
  bool backtrack() {
    while (!frames_.empty()) {
      Frame& f = frames_.back();
      engine_.store().undo(f.mark);
      auto next = engine_.store()[f.var].next_after(f.value);
      if (!next) {
        frames_.pop_back();
        continue;
      }
      f.value = *next;
      if (try_value(f.var, f.value)) return true;
    }
    return false;
  }

  std::optional<Solution> emit() {
    Solution sol;
    sol.values.reserve(model_.num_vars());
    for (const auto& d : engine_.store().domains()) sol.values.push_back(d.value());
    if (!satisfies_all(model_, sol)) {
      throw std::logic_error("solver produced an assignment violating the model");
    }
    return sol;
  }

  Model model_;
  SearchOptions options_;
  detail::Engine engine_;
  std::vector<VarId> order_;
  std::vector<Frame> frames_;
  std::optional<std::pair<Objective, std::int64_t>> bound_;
  std::uint64_t nodes_ = 0;
  bool started_ = false;
  bool done_ = false;
  bool over_budget_ = false;
};

/// Drains a search into a vector.
inline std::vector<Solution> solve_all(const Model& m, SearchOptions options = {}) {
  Search search(m, options);
  std::vector<Solution> out;
  while (auto s = search.next()) out.push_back(std::move(*s));
  return out;
}

/// Branch-and-bound over the model's objective. Returns the last (hence
/// optimal) solution found, or nullopt when unsatisfiable.
inline std::optional<Solution> optimize(const Model& m, SearchOptions options = {},
                                        std::uint64_t* nodes = nullptr) {
  if (!m.objective) throw ModelError("optimize requires an objective");
  const Objective obj = *m.objective;
  Search search(m, options);
  std::optional<Solution> best;
  try {
    while (auto s = search.next()) {
      search.require_better(obj, (*s)[obj.var]);
      best = std::move(s);
    }
  } catch (const BudgetExceeded&) {
    if (nodes) *nodes = search.nodes();
    throw;
  }
  if (nodes) *nodes = search.nodes();
  return best;
}

}  // namespace csee::fd
