#pragma once

#include <compare>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "csee/fd/domain.hpp"
#include "csee/types.hpp"

namespace csee::fd {

/// Dense index assigned by Model::new_var.
struct VarId {
  std::uint32_t index = 0;
  friend auto operator<=>(const VarId&, const VarId&) = default;
};

/// Either a variable or an integer constant.
using Operand = std::variant<VarId, std::int64_t>;

struct LinearTerm {
  std::int64_t coef = 1;
  VarId var;
  friend bool operator==(const LinearTerm&, const LinearTerm&) = default;
};

/// sum(coef * var) rel constant
struct LinearRel {
  std::vector<LinearTerm> terms;
  RelOp rel = RelOp::Eq;
  std::int64_t constant = 0;
  friend bool operator==(const LinearRel&, const LinearRel&) = default;
};

struct Diseq {
  VarId a;
  VarId b;
  friend bool operator==(const Diseq&, const Diseq&) = default;
};

/// x * y = z
struct Mul {
  VarId x;
  VarId y;
  VarId z;
  friend bool operator==(const Mul&, const Mul&) = default;
};

/// list[index] = value, index 1-based.
struct Element {
  Operand index;
  std::vector<Operand> list;
  VarId value;
  friend bool operator==(const Element&, const Element&) = default;
};

using Constraint = std::variant<LinearRel, Diseq, Mul, Element>;

enum class Direction { Minimize, Maximize };

struct Objective {
  Direction direction = Direction::Minimize;
  VarId var;
  friend bool operator==(const Objective&, const Objective&) = default;
};

/// Values beyond this magnitude are rejected so propagation arithmetic
/// stays inside 64 bits with headroom.
inline constexpr std::int64_t kMaxMagnitude = std::int64_t{1} << 62;

class ModelError : public Error {
 public:
  using Error::Error;
};

/// Assignment for every variable of a model, indexed by VarId.
struct Solution {
  std::vector<std::int64_t> values;

  std::int64_t operator[](VarId v) const { return values.at(v.index); }
  std::int64_t value(const Operand& o) const {
    if (const auto* v = std::get_if<VarId>(&o)) return (*this)[*v];
    return std::get<std::int64_t>(o);
  }
  friend bool operator==(const Solution&, const Solution&) = default;
};

/// A finite-domain CSP: variables with initial domains, constraints, the
/// labeling order and an optional objective. Posting records constraints;
/// propagation happens in the solver.
class Model {
 public:
  VarId new_var(const DomainSpec& spec, std::string name = {}) {
    return new_var(Domain::from_spec(spec), std::move(name));
  }

  VarId new_var(Domain d, std::string name = {}) {
    if (d.empty()) throw ModelError("empty domain for variable " + name);
    if (d.min() < -kMaxMagnitude || d.max() > kMaxMagnitude) {
      throw ModelError("domain of " + name + " exceeds 2^62 in magnitude");
    }
    VarId id{static_cast<std::uint32_t>(domains_.size())};
    domains_.push_back(std::move(d));
    if (name.empty()) name = "_v" + std::to_string(id.index);
    names_.push_back(std::move(name));
    return id;
  }

  void post(Constraint c) {
    std::visit([this](const auto& x) { validate(x); }, c);
    constraints_.push_back(std::move(c));
  }

  std::size_t num_vars() const { return domains_.size(); }
  const Domain& domain(VarId v) const { return domains_.at(v.index); }
  const std::vector<Domain>& domains() const { return domains_; }
  const std::string& name(VarId v) const { return names_.at(v.index); }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  /// Replaces a variable's initial domain (used when fixing an objective).
  void set_domain(VarId v, Domain d) {
    check(v);
    if (d.empty()) throw ModelError("empty domain for variable " + name(v));
    domains_[v.index] = std::move(d);
  }

  std::vector<VarId> label_order;
  std::optional<Objective> objective;

 private:
  void check(VarId v) const {
    if (v.index >= domains_.size()) {
      throw ModelError("unknown variable id " + std::to_string(v.index));
    }
  }
  void check(const Operand& o) const {
    if (const auto* v = std::get_if<VarId>(&o)) check(*v);
  }
  __int128 magnitude(VarId v) const {
    const Domain& d = domain(v);
    return std::max<__int128>(-static_cast<__int128>(d.min()), d.max());
  }

  void validate(const LinearRel& c) const {
    __int128 total = c.constant < 0 ? -static_cast<__int128>(c.constant) : c.constant;
    for (const auto& t : c.terms) {
      check(t.var);
      __int128 coef = t.coef < 0 ? -static_cast<__int128>(t.coef) : t.coef;
      total += coef * magnitude(t.var);
      if (total > kMaxMagnitude) throw ModelError("linear constraint exceeds 2^62 in magnitude");
    }
  }
  void validate(const Diseq& c) const {
    check(c.a);
    check(c.b);
  }
  void validate(const Mul& c) const {
    check(c.x);
    check(c.y);
    check(c.z);
    if (magnitude(c.x) * magnitude(c.y) > kMaxMagnitude) {
      throw ModelError("product exceeds 2^62 in magnitude");
    }
  }
  void validate(const Element& c) const {
    check(c.index);
    check(c.value);
    if (c.list.empty()) throw ModelError("element constraint over an empty list");
    for (const auto& o : c.list) check(o);
  }

  std::vector<Domain> domains_;
  std::vector<std::string> names_;
  std::vector<Constraint> constraints_;
};

namespace detail {

inline std::int64_t operand_min(const Model& m, const Operand& o) {
  if (const auto* v = std::get_if<VarId>(&o)) return m.domain(*v).min();
  return std::get<std::int64_t>(o);
}
inline std::int64_t operand_max(const Model& m, const Operand& o) {
  if (const auto* v = std::get_if<VarId>(&o)) return m.domain(*v).max();
  return std::get<std::int64_t>(o);
}

inline std::int64_t checked(__int128 v) {
  if (v > kMaxMagnitude || v < -kMaxMagnitude) {
    throw ModelError("intermediate value exceeds 2^62 in magnitude");
  }
  return static_cast<std::int64_t>(v);
}

inline Domain product_hull(std::int64_t alo, std::int64_t ahi, std::int64_t blo,
                           std::int64_t bhi) {
  __int128 c[4] = {static_cast<__int128>(alo) * blo, static_cast<__int128>(alo) * bhi,
                   static_cast<__int128>(ahi) * blo, static_cast<__int128>(ahi) * bhi};
  return Domain::interval(checked(*std::min_element(c, c + 4)),
                          checked(*std::max_element(c, c + 4)));
}

}  // namespace detail

/// Pairwise disequality over every unordered pair; constants are allowed
/// and compared directly.
inline void post_all_different(Model& m, std::span<const Operand> items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const auto* a = std::get_if<VarId>(&items[i]);
      const auto* b = std::get_if<VarId>(&items[j]);
      if (a && b) {
        m.post(Diseq{*a, *b});
      } else if (a || b) {
        VarId v = a ? *a : *b;
        std::int64_t k = a ? std::get<std::int64_t>(items[j]) : std::get<std::int64_t>(items[i]);
        m.post(LinearRel{{{1, v}}, RelOp::Neq, k});
      } else if (std::get<std::int64_t>(items[i]) == std::get<std::int64_t>(items[j])) {
        m.post(LinearRel{{}, RelOp::Neq, 0});  // 0 != 0: never satisfiable
      }
    }
  }
}

inline void post_all_different(Model& m, std::span<const VarId> vars) {
  std::vector<Operand> items(vars.begin(), vars.end());
  post_all_different(m, std::span<const Operand>(items));
}

/// Left fold of `items` under `op`, related to `rhs` by `rel`.
///
/// Add becomes one LinearRel. Mul folds constants into a coefficient and
/// chains the variables through auxiliary product variables whose domains
/// come from interval arithmetic; when the relation is equality against a
/// variable and there is no constant factor, the last product targets
/// `rhs` directly.
inline void post_fold_aggregate(Model& m, ArithOp op, std::span<const Operand> items, RelOp rel,
                                const Operand& rhs) {
  if (items.empty()) throw ModelError("aggregate over an empty group");
  if (op == ArithOp::Sub) throw ModelError("aggregation accepts only + and *");

  auto relate = [&](std::vector<LinearTerm> terms, std::int64_t constant) {
    // terms + constant rel rhs
    __int128 k = -static_cast<__int128>(constant);
    if (const auto* v = std::get_if<VarId>(&rhs)) {
      terms.push_back({-1, *v});
    } else {
      k += std::get<std::int64_t>(rhs);
    }
    m.post(LinearRel{std::move(terms), rel, detail::checked(k)});
  };

  if (op == ArithOp::Add) {
    std::vector<LinearTerm> terms;
    __int128 constant = 0;
    for (const auto& item : items) {
      if (const auto* v = std::get_if<VarId>(&item)) {
        terms.push_back({1, *v});
      } else {
        constant += std::get<std::int64_t>(item);
        detail::checked(constant);
      }
    }
    relate(std::move(terms), static_cast<std::int64_t>(constant));
    return;
  }

  __int128 factor = 1;
  std::vector<VarId> vars;
  for (const auto& item : items) {
    if (const auto* v = std::get_if<VarId>(&item)) {
      vars.push_back(*v);
    } else {
      factor *= std::get<std::int64_t>(item);
      detail::checked(factor);
    }
  }
  const auto coef = static_cast<std::int64_t>(factor);
  if (vars.empty()) {
    relate({}, coef);
    return;
  }
  VarId acc = vars.front();
  for (std::size_t i = 1; i < vars.size(); ++i) {
    const bool last = i + 1 == vars.size();
    if (last && coef == 1 && rel == RelOp::Eq && std::holds_alternative<VarId>(rhs)) {
      m.post(Mul{acc, vars[i], std::get<VarId>(rhs)});
      return;
    }
    Domain hull = detail::product_hull(m.domain(acc).min(), m.domain(acc).max(),
                                       m.domain(vars[i]).min(), m.domain(vars[i]).max());
    VarId prod = m.new_var(std::move(hull), "_mul" + std::to_string(m.num_vars()));
    m.post(Mul{acc, vars[i], prod});
    acc = prod;
  }
  relate({{coef, acc}}, 0);
}

inline void post_fold_aggregate(Model& m, ArithOp op, std::span<const VarId> vars, RelOp rel,
                                const Operand& rhs) {
  std::vector<Operand> items(vars.begin(), vars.end());
  post_fold_aggregate(m, op, std::span<const Operand>(items), rel, rhs);
}

/// Direct evaluation of one constraint under a total assignment.
inline bool satisfied(const Constraint& c, const Solution& s) {
  struct Visitor {
    const Solution& s;
    bool operator()(const LinearRel& c) const {
      __int128 sum = 0;
      for (const auto& t : c.terms) sum += static_cast<__int128>(t.coef) * s[t.var];
      return holds<__int128>(sum, c.rel, c.constant);
    }
    bool operator()(const Diseq& c) const { return s[c.a] != s[c.b]; }
    bool operator()(const Mul& c) const {
      return static_cast<__int128>(s[c.x]) * s[c.y] == s[c.z];
    }
    bool operator()(const Element& c) const {
      std::int64_t i = s.value(c.index);
      if (i < 1 || i > static_cast<std::int64_t>(c.list.size())) return false;
      return s.value(c.list[static_cast<std::size_t>(i - 1)]) == s[c.value];
    }
  };
  return std::visit(Visitor{s}, c);
}

inline bool satisfies_all(const Model& m, const Solution& s) {
  if (s.values.size() != m.num_vars()) return false;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!m.domains()[i].contains(s.values[i])) return false;
  }
  for (const auto& c : m.constraints()) {
    if (!satisfied(c, s)) return false;
  }
  return true;
}

}  // namespace csee::fd
