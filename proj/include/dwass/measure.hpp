#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dwass/rational.hpp"

namespace dwass {

/// Finitely-supported nonnegative measure on the countable ground space
/// X = {1, 2, 3, ...}. Entries with zero mass are never stored, so the key
/// set of `entries()` is exactly the support and equality is structural.
/// Immutable after construction; all operations below are pure.
template <class M>
class SparseMeasure {
 public:
  using mass_type = M;
  using traits = mass_traits<M>;
  using map_type = std::map<PointId, M>;

  SparseMeasure() = default;

  /// Builds a measure from point/mass pairs. Negative masses are rejected;
  /// zero masses are dropped.
  static SparseMeasure from_entries(map_type raw) {
    map_type kept;
    for (auto& [point, mass] : raw) {
      if (point < 1) throw std::invalid_argument("point label must be >= 1");
      if (traits::is_zero(mass)) continue;
      if (mass < M{}) throw std::invalid_argument("negative mass at point " + point.str());
      kept.emplace(point, std::move(mass));
    }
    SparseMeasure out;
    out.entries_ = std::move(kept);
    return out;
  }

  const map_type& entries() const { return entries_; }

  /// Mass at a single point (zero when absent).
  M at(const PointId& x) const {
    auto it = entries_.find(x);
    return it == entries_.end() ? traits::zero() : it->second;
  }

  M total() const {
    M sum = traits::zero();
    for (const auto& [point, mass] : entries_) sum += mass;
    return sum;
  }

  /// Support as a sorted list of labels.
  std::vector<PointId> support() const {
    std::vector<PointId> keys;
    keys.reserve(entries_.size());
    for (const auto& [point, mass] : entries_) keys.push_back(point);
    return keys;
  }

  std::size_t support_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const SparseMeasure& a, const SparseMeasure& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    auto ia = a.entries_.begin();
    auto ib = b.entries_.begin();
    for (; ia != a.entries_.end(); ++ia, ++ib) {
      if (ia->first != ib->first || !traits::eq(ia->second, ib->second)) return false;
    }
    return true;
  }
  friend bool operator!=(const SparseMeasure& a, const SparseMeasure& b) { return !(a == b); }

 private:
  map_type entries_;

  template <class T>
  friend class MeasureBuilder;
};

/// Accumulates point masses without per-insert validation; `build()` prunes
/// zeros. Internal helper for the operations below.
template <class M>
class MeasureBuilder {
 public:
  void add(const PointId& x, const M& mass) {
    auto [it, inserted] = acc_.try_emplace(x, mass);
    if (!inserted) it->second += mass;
  }

  SparseMeasure<M> build() && {
    typename SparseMeasure<M>::map_type kept;
    for (auto& [point, mass] : acc_) {
      if (!SparseMeasure<M>::traits::is_zero(mass)) kept.emplace(point, std::move(mass));
    }
    SparseMeasure<M> out;
    out.entries_ = std::move(kept);
    return out;
  }

 private:
  typename SparseMeasure<M>::map_type acc_;
};

/// Probability measure: a SparseMeasure with unit total mass.
template <class M>
class ProbabilityMeasure {
 public:
  using traits = mass_traits<M>;

  explicit ProbabilityMeasure(SparseMeasure<M> inner) : inner_(std::move(inner)) {
    if (!traits::eq(inner_.total(), traits::one())) {
      throw std::invalid_argument("total mass must be 1");
    }
  }

  const SparseMeasure<M>& measure() const { return inner_; }
  M at(const PointId& x) const { return inner_.at(x); }
  std::vector<PointId> support() const { return inner_.support(); }

  friend bool operator==(const ProbabilityMeasure& a, const ProbabilityMeasure& b) {
    return a.inner_ == b.inner_;
  }
  friend bool operator!=(const ProbabilityMeasure& a, const ProbabilityMeasure& b) {
    return !(a == b);
  }

 private:
  SparseMeasure<M> inner_;
};

template <class M>
ProbabilityMeasure<M> dirac(const PointId& x) {
  if (x < 1) throw std::invalid_argument("point label must be >= 1");
  typename SparseMeasure<M>::map_type entries;
  entries.emplace(x, mass_traits<M>::one());
  return ProbabilityMeasure<M>(SparseMeasure<M>::from_entries(std::move(entries)));
}

template <class M>
M total_mass(const SparseMeasure<M>& mu) {
  return mu.total();
}

template <class M>
std::vector<PointId> support(const SparseMeasure<M>& mu) {
  return mu.support();
}

/// Greatest lower bound: pointwise minimum.
template <class M>
SparseMeasure<M> meet(const SparseMeasure<M>& mu, const SparseMeasure<M>& nu) {
  MeasureBuilder<M> out;
  const auto& small = mu.entries().size() <= nu.entries().size() ? mu : nu;
  const auto& other = (&small == &mu) ? nu : mu;
  for (const auto& [point, mass] : small.entries()) {
    auto it = other.entries().find(point);
    if (it != other.entries().end()) out.add(point, std::min(mass, it->second));
  }
  return std::move(out).build();
}

/// Pointwise max(0, mu - nu): the nonnegative part of the difference.
template <class M>
SparseMeasure<M> positive_difference(const SparseMeasure<M>& mu, const SparseMeasure<M>& nu) {
  MeasureBuilder<M> out;
  for (const auto& [point, mass] : mu.entries()) {
    const M other = nu.at(point);
    if (other < mass) out.add(point, mass - other);
  }
  return std::move(out).build();
}

/// Restriction to a label set: keeps exactly the entries whose key is in T.
template <class M>
SparseMeasure<M> restrict_to(const SparseMeasure<M>& mu, const std::vector<PointId>& sorted_T) {
  MeasureBuilder<M> out;
  for (const auto& [point, mass] : mu.entries()) {
    if (std::binary_search(sorted_T.begin(), sorted_T.end(), point)) out.add(point, mass);
  }
  return std::move(out).build();
}

template <class M>
SparseMeasure<M> add(const SparseMeasure<M>& mu, const SparseMeasure<M>& nu) {
  MeasureBuilder<M> out;
  for (const auto& [point, mass] : mu.entries()) out.add(point, mass);
  for (const auto& [point, mass] : nu.entries()) out.add(point, mass);
  return std::move(out).build();
}

template <class M>
SparseMeasure<M> scale(const M& factor, const SparseMeasure<M>& mu) {
  if (factor < M{}) throw std::invalid_argument("scale factor must be nonnegative");
  MeasureBuilder<M> out;
  for (const auto& [point, mass] : mu.entries()) out.add(point, M(factor * mass));
  return std::move(out).build();
}

/// Pointwise partial order: mu({x}) <= nu({x}) for every x.
template <class M>
bool leq(const SparseMeasure<M>& mu, const SparseMeasure<M>& nu) {
  for (const auto& [point, mass] : mu.entries()) {
    if (!mass_traits<M>::leq(mass, nu.at(point))) return false;
  }
  return true;
}

/// Total map X -> X given as finite overrides on top of a base rule.
/// Unlisted labels go through the base (identity or a fixed shift).
class PointMap {
 public:
  static PointMap identity() { return PointMap{}; }

  static PointMap shift(BigInt offset) {
    if (offset < 0) throw std::invalid_argument("shift offset must be >= 0");
    PointMap out;
    out.offset_ = std::move(offset);
    return out;
  }

  /// Overrides on top of the identity. The override values must be distinct.
  static PointMap table(std::map<PointId, PointId> overrides) {
    std::vector<PointId> values;
    for (const auto& [from, to] : overrides) {
      if (from < 1 || to < 1) throw std::invalid_argument("point label must be >= 1");
      values.push_back(to);
    }
    std::sort(values.begin(), values.end());
    if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
      throw std::invalid_argument("map table is not injective");
    }
    PointMap out;
    out.overrides_ = std::move(overrides);
    return out;
  }

  PointId operator()(const PointId& x) const {
    auto it = overrides_.find(x);
    if (it != overrides_.end()) return it->second;
    return x + offset_;
  }

  bool injective_on(const std::vector<PointId>& window) const {
    std::vector<PointId> images;
    images.reserve(window.size());
    for (const auto& x : window) images.push_back((*this)(x));
    std::sort(images.begin(), images.end());
    return std::adjacent_find(images.begin(), images.end()) == images.end();
  }

  const std::map<PointId, PointId>& overrides() const { return overrides_; }
  const BigInt& offset() const { return offset_; }

 private:
  std::map<PointId, PointId> overrides_;
  BigInt offset_ = 0;
};

/// Push-forward along sigma; sigma must be injective on the support.
template <class M, class F>
SparseMeasure<M> push_forward(const SparseMeasure<M>& mu, F&& sigma) {
  typename SparseMeasure<M>::map_type moved;
  for (const auto& [point, mass] : mu.entries()) {
    PointId image = sigma(point);
    if (image < 1) throw std::invalid_argument("push-forward image label must be >= 1");
    auto [it, inserted] = moved.emplace(std::move(image), mass);
    if (!inserted) {
      throw std::invalid_argument("push-forward map is not injective on the support (collision at " +
                                  it->first.str() + ")");
    }
  }
  SparseMeasure<M> out = SparseMeasure<M>::from_entries(std::move(moved));
  return out;
}

template <class M, class F>
ProbabilityMeasure<M> push_forward(const ProbabilityMeasure<M>& mu, F&& sigma) {
  return ProbabilityMeasure<M>(push_forward(mu.measure(), std::forward<F>(sigma)));
}

}  // namespace dwass
