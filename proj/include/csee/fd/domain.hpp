#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csee/types.hpp"

namespace csee::fd {

/// Finite integer set stored as sorted, disjoint, non-adjacent closed
/// intervals. min/max are O(1), membership is a binary search.
class Domain {
 public:
  struct Interval {
    std::int64_t lo;
    std::int64_t hi;
    friend bool operator==(const Interval&, const Interval&) = default;
  };

  Domain() = default;

  static Domain interval(std::int64_t lo, std::int64_t hi) {
    Domain d;
    if (lo <= hi) {
      d.parts_.push_back({lo, hi});
      d.size_ = static_cast<std::uint64_t>(hi - lo) + 1;
    }
    return d;
  }

  static Domain singleton(std::int64_t v) { return interval(v, v); }

  static Domain from_values(std::span<const std::int64_t> values) {
    std::vector<std::int64_t> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    Domain d;
    for (std::int64_t v : sorted) {
      if (!d.parts_.empty() && d.parts_.back().hi + 1 == v) {
        d.parts_.back().hi = v;
      } else {
        d.parts_.push_back({v, v});
      }
    }
    d.size_ = sorted.size();
    return d;
  }

  static Domain from_spec(const DomainSpec& spec) {
    if (const auto* iv = std::get_if<IntervalDom>(&spec)) return interval(iv->lo, iv->hi);
    return from_values(std::get<ListDom>(spec).values);
  }

  bool empty() const { return parts_.empty(); }
  bool fixed() const { return size_ == 1; }
  std::uint64_t size() const { return size_; }
  std::int64_t min() const { return parts_.front().lo; }
  std::int64_t max() const { return parts_.back().hi; }
  std::int64_t value() const { return min(); }
  const std::vector<Interval>& intervals() const { return parts_; }

  bool contains(std::int64_t v) const {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), v,
                               [](std::int64_t x, const Interval& iv) { return x < iv.lo; });
    return it != parts_.begin() && std::prev(it)->hi >= v;
  }

  /// Smallest member strictly greater than `v`.
  std::optional<std::int64_t> next_after(std::int64_t v) const {
    for (const auto& iv : parts_) {
      if (iv.hi <= v) continue;
      return std::max(iv.lo, v + 1);
    }
    return std::nullopt;
  }

  std::vector<std::int64_t> values() const {
    std::vector<std::int64_t> out;
    for (const auto& iv : parts_) {
      for (std::int64_t v = iv.lo;; ++v) {
        out.push_back(v);
        if (v == iv.hi) break;
      }
    }
    return out;
  }

  // Mutators return true when the set changed.

  bool restrict_min(std::int64_t lo) {
    if (empty() || lo <= min()) return false;
    auto it = parts_.begin();
    while (it != parts_.end() && it->hi < lo) ++it;
    parts_.erase(parts_.begin(), it);
    if (!parts_.empty() && parts_.front().lo < lo) parts_.front().lo = lo;
    recount();
    return true;
  }

  bool restrict_max(std::int64_t hi) {
    if (empty() || hi >= max()) return false;
    while (!parts_.empty() && parts_.back().lo > hi) parts_.pop_back();
    if (!parts_.empty() && parts_.back().hi > hi) parts_.back().hi = hi;
    recount();
    return true;
  }

  bool remove(std::int64_t v) {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), v,
                               [](std::int64_t x, const Interval& iv) { return x < iv.lo; });
    if (it == parts_.begin()) return false;
    --it;
    if (it->hi < v) return false;
    if (it->lo == v && it->hi == v) {
      parts_.erase(it);
    } else if (it->lo == v) {
      ++it->lo;
    } else if (it->hi == v) {
      --it->hi;
    } else {
      Interval upper{v + 1, it->hi};
      it->hi = v - 1;
      parts_.insert(std::next(it), upper);
    }
    --size_;
    return true;
  }

  bool assign(std::int64_t v) {
    if (size_ == 1 && parts_.front().lo == v) return false;
    if (!contains(v)) {
      parts_.clear();
      size_ = 0;
      return true;
    }
    parts_.assign(1, Interval{v, v});
    size_ = 1;
    return true;
  }

  bool intersect(const Domain& other) {
    std::vector<Interval> out;
    auto a = parts_.begin();
    auto b = other.parts_.begin();
    while (a != parts_.end() && b != other.parts_.end()) {
      std::int64_t lo = std::max(a->lo, b->lo);
      std::int64_t hi = std::min(a->hi, b->hi);
      if (lo <= hi) out.push_back({lo, hi});
      if (a->hi < b->hi) {
        ++a;
      } else {
        ++b;
      }
    }
    if (out == parts_) return false;
    parts_ = std::move(out);
    recount();
    return true;
  }

  bool intersects(const Domain& other) const {
    auto a = parts_.begin();
    auto b = other.parts_.begin();
    while (a != parts_.end() && b != other.parts_.end()) {
      if (std::max(a->lo, b->lo) <= std::min(a->hi, b->hi)) return true;
      if (a->hi < b->hi) {
        ++a;
      } else {
        ++b;
      }
    }
    return false;
  }

  /// "1..5", "[1,3,5]", or "{}" when empty.
  std::string to_string() const {
    if (empty()) return "{}";
    if (parts_.size() == 1 && size_ > 1) {
      return std::to_string(min()) + ".." + std::to_string(max());
    }
    return render_int_list(values());
  }

  friend bool operator==(const Domain& a, const Domain& b) { return a.parts_ == b.parts_; }

 private:
  void recount() {
    size_ = 0;
    for (const auto& iv : parts_) size_ += static_cast<std::uint64_t>(iv.hi - iv.lo) + 1;
  }

  std::vector<Interval> parts_;
  std::uint64_t size_ = 0;
};

}  // namespace csee::fd
