#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "dwass/measure.hpp"

namespace dwass {

/// Order parameter of the distance: a finite positive rational, or infinity.
class PParameter {
 public:
  static PParameter finite(Rational p) {
    if (p <= 0) throw std::invalid_argument("p must be positive");
    return PParameter{std::move(p), false};
  }
  static PParameter infinity() { return PParameter{Rational(0), true}; }

  bool is_infinite() const { return infinite_; }
  const Rational& value() const {
    if (infinite_) throw std::logic_error("p is infinite");
    return p_;
  }

 private:
  PParameter(Rational p, bool infinite) : p_(std::move(p)), infinite_(infinite) {}
  Rational p_;
  bool infinite_;
};

/// Transport plan between two probability measures, stored sparsely over
/// pairs of labels together with its two marginals.
template <class M>
struct Coupling {
  using pair_map = std::map<std::pair<PointId, PointId>, M>;

  pair_map entries;
  ProbabilityMeasure<M> left;
  ProbabilityMeasure<M> right;

  M total() const {
    M sum = mass_traits<M>::zero();
    for (const auto& [pair, mass] : entries) sum += mass;
    return sum;
  }

  /// Mass sitting on pairs with equal components.
  M diagonal_mass() const {
    M sum = mass_traits<M>::zero();
    for (const auto& [pair, mass] : entries) {
      if (pair.first == pair.second) sum += mass;
    }
    return sum;
  }
};

/// The distance raised to the p-th power, which does not depend on finite p:
/// 1 minus the total mass of the pointwise minimum. Defined for any pair of
/// measures; for probability measures this is the exact transport cost.
template <class M>
M wasserstein_power(const SparseMeasure<M>& mu, const SparseMeasure<M>& nu) {
  return M(mass_traits<M>::one() - meet(mu, nu).total());
}

template <class M>
M wasserstein_power(const ProbabilityMeasure<M>& mu, const ProbabilityMeasure<M>& nu) {
  return wasserstein_power(mu.measure(), nu.measure());
}

/// The distance itself, as binary64: the p-th root of the power for finite
/// p >= 1, the power unrooted for p in (0,1), and the 0/1 discrete metric at
/// p = infinity.
template <class M>
double wasserstein_distance(const ProbabilityMeasure<M>& mu, const ProbabilityMeasure<M>& nu,
                            const PParameter& p) {
  if (p.is_infinite()) return mu == nu ? 0.0 : 1.0;
  const double power = mass_traits<M>::to_double(wasserstein_power(mu, nu));
  if (p.value() <= 1) return power;  // p in (0,1) collapses; p == 1 needs no root
  const double exponent = 1.0 / rational_to_double(p.value());
  return std::pow(power, exponent);
}

/// The explicit optimal plan: the diagonal carries the pointwise minimum and
/// the leftover mass is spread as the normalized product of the two
/// one-sided differences. For mu == nu the plan is purely diagonal.
template <class M>
Coupling<M> optimal_coupling(const ProbabilityMeasure<M>& mu, const ProbabilityMeasure<M>& nu) {
  using traits = mass_traits<M>;
  typename Coupling<M>::pair_map entries;

  const SparseMeasure<M> overlap = meet(mu.measure(), nu.measure());
  for (const auto& [point, mass] : overlap.entries()) {
    entries.emplace(std::make_pair(point, point), mass);
  }

  const M leftover = M(traits::one() - overlap.total());
  if (!traits::is_zero(leftover)) {
    const SparseMeasure<M> excess = positive_difference(mu.measure(), nu.measure());
    const SparseMeasure<M> deficit = positive_difference(nu.measure(), mu.measure());
    for (const auto& [from, supply] : excess.entries()) {
      for (const auto& [to, demand] : deficit.entries()) {
        M mass = M(supply * demand / leftover);
        if (!traits::is_zero(mass)) entries.emplace(std::make_pair(from, to), std::move(mass));
      }
    }
  }
  return Coupling<M>{std::move(entries), mu, nu};
}

/// Transport cost of a plan under the 0/1 ground cost: the off-diagonal mass.
/// Requires finite p (the cost is the same for every finite exponent).
template <class M>
M coupling_cost(const Coupling<M>& plan, const PParameter& p) {
  if (p.is_infinite()) throw std::invalid_argument("coupling cost needs finite p");
  return M(plan.total() - plan.diagonal_mass());
}

/// Checks both marginal identities exactly on singletons.
template <class M>
bool validate_coupling(const Coupling<M>& plan, const ProbabilityMeasure<M>& mu,
                       const ProbabilityMeasure<M>& nu) {
  MeasureBuilder<M> first;
  MeasureBuilder<M> second;
  for (const auto& [pair, mass] : plan.entries) {
    first.add(pair.first, mass);
    second.add(pair.second, mass);
  }
  return std::move(first).build() == mu.measure() && std::move(second).build() == nu.measure();
}

}  // namespace dwass
