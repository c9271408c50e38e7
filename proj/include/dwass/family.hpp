#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <map>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "dwass/json_measure.hpp"
#include "dwass/measure.hpp"
#include "dwass/primes.hpp"

namespace dwass {

/// Tail tolerance used when a curve value can only be materialized as a
/// truncation (the prime-power curves at t = 1). 2^-20 by default.
template <class M>
M default_tail_tolerance() {
  return mass_traits<M>::from_rational(Rational(1, 1048576));
}

template <class M>
M power_of_half(unsigned j) {
  return mass_traits<M>::from_rational(Rational(1, BigInt(1) << j));
}

/// A curve value plus the mass dropped by truncation (zero for exact kinds).
template <class M>
struct CurveSample {
  SparseMeasure<M> measure;
  M tail = mass_traits<M>::zero();
};

/// Splitting function g for two-point curves: g nondecreasing,
/// t - g(t) nondecreasing and 0 <= g(t) <= t on (0,1].
template <class M>
class MonotoneGauge {
 public:
  enum class Kind { linear, log1p, custom };

  /// g(t) = alpha * t with alpha in [0,1].
  static MonotoneGauge linear(M alpha) {
    using traits = mass_traits<M>;
    if (!traits::leq(traits::zero(), alpha) || !traits::leq(alpha, traits::one())) {
      throw std::invalid_argument("linear gauge slope must lie in [0,1]");
    }
    MonotoneGauge g;
    g.kind_ = Kind::linear;
    g.alpha_ = std::move(alpha);
    return g;
  }

  /// g(t) = ln(1+t); float backend only (its values are irrational).
  static MonotoneGauge log1p_gauge() {
    MonotoneGauge g;
    g.kind_ = Kind::log1p;
    return g;
  }

  /// Piecewise-linear interpolation of (t_i, g_i) samples, anchored at
  /// (0,0); t strictly increasing, last sample at t = 1. Admissibility of
  /// the samples carries over to the interpolant.
  static MonotoneGauge custom(std::vector<std::pair<M, M>> samples) {
    using traits = mass_traits<M>;
    if (samples.empty()) throw std::invalid_argument("custom gauge needs samples");
    M prev_t = traits::zero();
    M prev_g = traits::zero();
    for (const auto& [t, g] : samples) {
      if (!(prev_t < t)) throw std::invalid_argument("custom gauge samples must increase in t");
      if (!traits::leq(prev_g, g)) throw std::invalid_argument("custom gauge must be nondecreasing");
      if (!traits::leq(M(prev_t - prev_g), M(t - g))) {
        throw std::invalid_argument("custom gauge must keep t - g(t) nondecreasing");
      }
      if (!traits::leq(traits::zero(), g) || !traits::leq(g, t)) {
        throw std::invalid_argument("custom gauge must satisfy 0 <= g(t) <= t");
      }
      prev_t = t;
      prev_g = g;
    }
    if (!mass_traits<M>::eq(samples.back().first, mass_traits<M>::one())) {
      throw std::invalid_argument("custom gauge samples must end at t = 1");
    }
    MonotoneGauge out;
    out.kind_ = Kind::custom;
    out.samples_ = std::move(samples);
    return out;
  }

  M operator()(const M& t) const {
    switch (kind_) {
      case Kind::linear:
        return M(alpha_ * t);
      case Kind::log1p:
        if constexpr (std::is_same_v<M, double>) {
          return std::log1p(t);
        } else {
          throw std::logic_error("log gauge is only available on the float64 backend");
        }
      case Kind::custom: {
        M lo_t = mass_traits<M>::zero();
        M lo_g = mass_traits<M>::zero();
        for (const auto& [hi_t, hi_g] : samples_) {
          if (t <= hi_t) {
            return M(lo_g + (t - lo_t) * (hi_g - lo_g) / (hi_t - lo_t));
          }
          lo_t = hi_t;
          lo_g = hi_g;
        }
        return samples_.back().second;
      }
    }
    throw std::logic_error("unreachable");
  }

  Kind kind() const { return kind_; }
  const M& alpha() const { return alpha_; }
  const std::vector<std::pair<M, M>>& samples() const { return samples_; }

  /// True when admissibility holds for every t, not just on a grid.
  bool exactly_checkable() const { return kind_ != Kind::log1p; }

 private:
  MonotoneGauge() = default;
  Kind kind_ = Kind::linear;
  M alpha_ = mass_traits<M>::zero();
  std::vector<std::pair<M, M>> samples_;
};

struct DiracCurve {
  PointId target;
};

template <class M>
struct TwoPointSplitCurve {
  PointId lo;
  PointId hi;
  MonotoneGauge<M> gauge;
};

/// Curve over the powers of the n-th prime with halving coefficients.
struct DyadicPrimeCurve {
  std::uint64_t base_index;
};

/// Accumulated jumps at breakpoints plus a linear ramp per segment:
/// value(t) = sum of increments at breakpoints <= t, plus
/// (t - last breakpoint <= t) times the current segment's direction.
/// Valid curves satisfy increments[i] == segment_length(i) * directions[i]
/// and unit direction totals; verify_family reports violations.
template <class M>
struct PiecewiseCurve {
  std::vector<M> breakpoints;                 // strictly increasing, in (0,1], last == 1
  std::vector<SparseMeasure<M>> increments;   // one per breakpoint
  std::vector<SparseMeasure<M>> directions;   // one per segment ending at that breakpoint
};

template <class M>
struct BlackBoxCurve {
  std::function<SparseMeasure<M>(const M&)> eval;
};

template <class M>
using CurveVariant = std::variant<DiracCurve, TwoPointSplitCurve<M>, DyadicPrimeCurve,
                                  PiecewiseCurve<M>, BlackBoxCurve<M>>;

template <class M>
class AllocationCurve {
 public:
  explicit AllocationCurve(CurveVariant<M> repr) : repr_(std::move(repr)) {}

  const CurveVariant<M>& repr() const { return repr_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&repr_);
  }

 private:
  CurveVariant<M> repr_;
};

template <class M>
AllocationCurve<M> make_dirac_curve(PointId target) {
  if (target < 1) throw std::invalid_argument("point label must be >= 1");
  return AllocationCurve<M>(CurveVariant<M>(DiracCurve{std::move(target)}));
}

template <class M>
AllocationCurve<M> make_two_point_split(PointId lo, PointId hi, MonotoneGauge<M> gauge) {
  if (lo < 1 || hi < 1) throw std::invalid_argument("point label must be >= 1");
  if (lo == hi) throw std::invalid_argument("two-point split needs distinct targets");
  return AllocationCurve<M>(CurveVariant<M>(TwoPointSplitCurve<M>{std::move(lo), std::move(hi), std::move(gauge)}));
}

template <class M>
AllocationCurve<M> make_dyadic_prime_curve(std::uint64_t base_index) {
  if (base_index == 0) throw std::invalid_argument("prime index is 1-based");
  return AllocationCurve<M>(CurveVariant<M>(DyadicPrimeCurve{base_index}));
}

template <class M>
AllocationCurve<M> make_piecewise_curve(std::vector<M> breakpoints,
                                        std::vector<SparseMeasure<M>> increments,
                                        std::vector<SparseMeasure<M>> directions) {
  using traits = mass_traits<M>;
  if (breakpoints.empty() || breakpoints.size() != increments.size() ||
      breakpoints.size() != directions.size()) {
    throw std::invalid_argument("piecewise curve arrays must be nonempty and equally sized");
  }
  M prev = traits::zero();
  for (const auto& b : breakpoints) {
    if (!(prev < b)) throw std::invalid_argument("piecewise breakpoints must be strictly increasing");
    prev = b;
  }
  if (!traits::eq(breakpoints.back(), traits::one())) {
    throw std::invalid_argument("piecewise breakpoints must end at 1");
  }
  return AllocationCurve<M>(CurveVariant<M>(
      PiecewiseCurve<M>{std::move(breakpoints), std::move(increments), std::move(directions)}));
}

template <class M>
AllocationCurve<M> make_black_box_curve(std::function<SparseMeasure<M>(const M&)> eval) {
  return AllocationCurve<M>(CurveVariant<M>(BlackBoxCurve<M>{std::move(eval)}));
}

/// N(c): the count of halving terms that fit under c, i.e. the unique N with
/// 1 - 2^-N <= c < 1 - 2^-(N+1); unbounded (nullopt) at c = 1.
template <class M>
std::optional<std::uint32_t> n_of_c(const M& c) {
  using traits = mass_traits<M>;
  if (!traits::leq(traits::zero(), c) || !traits::leq(c, traits::one())) {
    throw std::invalid_argument("c must lie in [0,1]");
  }
  if (traits::eq(c, traits::one())) return std::nullopt;
  std::uint32_t n = 0;
  M partial = traits::zero();
  M term = power_of_half<M>(1);
  while (traits::leq(M(partial + term), c)) {
    partial += term;
    term = M(term / M(2));
    ++n;
  }
  return n;
}

/// The prime-power curve at height c: halving masses on p_n, p_n^2, ... with
/// an exact remainder term for c < 1, and an epsilon-truncated geometric
/// series for c = 1 (the dropped tail is reported, never silent).
template <class M>
CurveSample<M> dyadic_prime_curve_at(std::uint64_t n, const M& c, const M& epsilon) {
  using traits = mass_traits<M>;
  if (!(traits::zero() < c) || !traits::leq(c, traits::one())) {
    throw std::invalid_argument("curve parameter must lie in (0,1]");
  }
  const BigInt p{nth_prime(n)};
  typename SparseMeasure<M>::map_type entries;

  const auto count = n_of_c(c);
  if (count.has_value()) {
    M partial = traits::zero();
    BigInt label = 1;
    for (std::uint32_t j = 1; j <= *count; ++j) {
      label = (j == 1) ? p : BigInt(label * p);
      const M mass = power_of_half<M>(j);
      entries.emplace(label, mass);
      partial += mass;
    }
    const M remainder = M(c - partial);
    if (!traits::is_zero(remainder)) {
      entries.emplace(*count == 0 ? p : BigInt(label * p), remainder);
    }
    return CurveSample<M>{SparseMeasure<M>::from_entries(std::move(entries)), traits::zero()};
  }

  if (!(traits::zero() < epsilon)) {
    throw std::invalid_argument("t = 1 needs a positive tail tolerance");
  }
  unsigned cut = 1;
  while (!traits::leq(power_of_half<M>(cut), epsilon)) ++cut;
  BigInt label = 1;
  for (unsigned j = 1; j <= cut; ++j) {
    label = (j == 1) ? p : BigInt(label * p);
    entries.emplace(label, power_of_half<M>(j));
  }
  return CurveSample<M>{SparseMeasure<M>::from_entries(std::move(entries)), power_of_half<M>(cut)};
}

/// Evaluates a curve at t in (0,1]. epsilon only matters for curve kinds
/// that truncate; the dropped tail comes back in the sample.
template <class M>
CurveSample<M> curve_at(const AllocationCurve<M>& curve, const M& t, const M& epsilon) {
  using traits = mass_traits<M>;
  if (!(traits::zero() < t) || !traits::leq(t, traits::one())) {
    throw std::invalid_argument("curve parameter must lie in (0,1]");
  }
  return std::visit(
      [&](const auto& c) -> CurveSample<M> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, DiracCurve>) {
          typename SparseMeasure<M>::map_type entries;
          entries.emplace(c.target, t);
          return CurveSample<M>{SparseMeasure<M>::from_entries(std::move(entries)), traits::zero()};
        } else if constexpr (std::is_same_v<T, TwoPointSplitCurve<M>>) {
          const M g = c.gauge(t);
          typename SparseMeasure<M>::map_type entries;
          entries.emplace(c.lo, g);
          entries.emplace(c.hi, M(t - g));
          return CurveSample<M>{SparseMeasure<M>::from_entries(std::move(entries)), traits::zero()};
        } else if constexpr (std::is_same_v<T, DyadicPrimeCurve>) {
          return dyadic_prime_curve_at<M>(c.base_index, t, epsilon);
        } else if constexpr (std::is_same_v<T, PiecewiseCurve<M>>) {
          MeasureBuilder<M> acc;
          std::size_t settled = 0;
          M settled_at = traits::zero();
          while (settled < c.breakpoints.size() && c.breakpoints[settled] <= t) {
            for (const auto& [point, mass] : c.increments[settled].entries()) acc.add(point, mass);
            settled_at = c.breakpoints[settled];
            ++settled;
          }
          if (settled < c.breakpoints.size() && settled_at < t) {
            const M ramp = M(t - settled_at);
            for (const auto& [point, mass] : c.directions[settled].entries()) {
              acc.add(point, M(ramp * mass));
            }
          }
          return CurveSample<M>{std::move(acc).build(), traits::zero()};
        } else {
          static_assert(std::is_same_v<T, BlackBoxCurve<M>>);
          return CurveSample<M>{c.eval(t), traits::zero()};
        }
      },
      curve.repr());
}

/// A full allocation family: one curve per ground point, either materialized
/// on a finite window or generated by a rule valid on all of X.
template <class M>
class AllocationFamily {
 public:
  enum class Rule { explicit_curves, example1, example2, permutation };

  /// Every Dirac mass splits over a fresh adjacent pair {2n, 2n+1}.
  static AllocationFamily example1(MonotoneGauge<M> gauge) {
    AllocationFamily out;
    out.rule_ = Rule::example1;
    out.gauge_ = std::move(gauge);
    return out;
  }

  /// Every Dirac mass spreads over the powers of its own prime.
  static AllocationFamily example2() {
    AllocationFamily out;
    out.rule_ = Rule::example2;
    return out;
  }

  /// Relabeling family: the curve at x ramps the Dirac mass at sigma(x).
  static AllocationFamily permutation(PointMap sigma) {
    AllocationFamily out;
    out.rule_ = Rule::permutation;
    out.sigma_ = std::move(sigma);
    return out;
  }

  static AllocationFamily explicit_curves(std::map<PointId, AllocationCurve<M>> curves) {
    if (curves.empty()) throw std::invalid_argument("family needs at least one curve");
    AllocationFamily out;
    out.rule_ = Rule::explicit_curves;
    out.curves_ = std::move(curves);
    return out;
  }

  Rule rule() const { return rule_; }
  const MonotoneGauge<M>& gauge() const { return gauge_; }
  const PointMap& sigma() const { return sigma_; }
  const std::map<PointId, AllocationCurve<M>>& curves() const { return curves_; }

  AllocationCurve<M> curve_for(const PointId& x) const {
    switch (rule_) {
      case Rule::explicit_curves: {
        auto it = curves_.find(x);
        if (it == curves_.end()) {
          throw std::invalid_argument("family has no curve at point " + x.str());
        }
        return it->second;
      }
      case Rule::example1:
        return make_two_point_split<M>(PointId(2 * x), PointId(2 * x + 1), gauge_);
      case Rule::example2: {
        if (x > 1000000) throw std::invalid_argument("label too large for the prime-power family");
        return make_dyadic_prime_curve<M>(x.convert_to<std::uint64_t>());
      }
      case Rule::permutation:
        return make_dirac_curve<M>(sigma_(x));
    }
    throw std::logic_error("unreachable");
  }

 private:
  AllocationFamily() : gauge_(MonotoneGauge<M>::linear(mass_traits<M>::zero())) {}

  Rule rule_ = Rule::explicit_curves;
  std::map<PointId, AllocationCurve<M>> curves_;
  MonotoneGauge<M> gauge_;
  PointMap sigma_;
};

enum class CheckMode { exact, grid };

inline const char* check_mode_name(CheckMode mode) {
  return mode == CheckMode::exact ? "exact" : "grid";
}

struct ConditionReport {
  bool pass = true;
  CheckMode mode = CheckMode::exact;
  OrderedJson witness;  // null when passing

  OrderedJson to_json() const {
    OrderedJson out{{"pass", pass}, {"checked", check_mode_name(mode)}};
    if (!witness.is_null()) out["witness"] = witness;
    return out;
  }
};

/// Per-condition verdicts for a family on a finite window: disjoint top
/// supports, total law, monotonicity. Structured curve kinds are decided
/// exactly; black-box and transcendental-gauge curves only on the grid.
struct VerificationReport {
  std::vector<PointId> window;
  ConditionReport disjoint_top_supports;
  ConditionReport total_law;
  ConditionReport monotone;

  bool pass() const { return disjoint_top_supports.pass && total_law.pass && monotone.pass; }

  OrderedJson to_json() const {
    return OrderedJson{{"pass", pass()},
                       {"window", window_to_json(window)},
                       {"disjoint-top-supports", disjoint_top_supports.to_json()},
                       {"total-law", total_law.to_json()},
                       {"monotone", monotone.to_json()}};
  }
};

struct FamilyInvalidError : std::runtime_error {
  explicit FamilyInvalidError(VerificationReport r)
      : std::runtime_error("allocation family failed verification: " + r.to_json().dump()),
        report(std::move(r)) {}
  VerificationReport report;
};

namespace detail {

template <class M>
void check_on_grid(const AllocationCurve<M>& curve, const PointId& x, const std::vector<M>& grid,
                   const M& epsilon, ConditionReport& total_law, ConditionReport& monotone) {
  using traits = mass_traits<M>;
  total_law.mode = CheckMode::grid;
  monotone.mode = CheckMode::grid;
  SparseMeasure<M> previous;
  bool have_previous = false;
  M previous_t = traits::zero();
  for (const auto& t : grid) {
    const CurveSample<M> sample = curve_at(curve, t, epsilon);
    const M expected = M(t - sample.tail);
    if (total_law.pass && !traits::eq(sample.measure.total(), expected)) {
      total_law.pass = false;
      total_law.witness = OrderedJson{{"x", point_to_string(x)},
                                      {"t", mass_to_json(t)},
                                      {"total", mass_to_json(sample.measure.total())},
                                      {"expected", mass_to_json(expected)}};
    }
    if (monotone.pass && have_previous && !leq(previous, sample.measure)) {
      monotone.pass = false;
      monotone.witness = OrderedJson{{"x", point_to_string(x)},
                                     {"s", mass_to_json(previous_t)},
                                     {"t", mass_to_json(t)}};
    }
    previous = sample.measure;
    previous_t = t;
    have_previous = true;
  }
}

template <class M>
void check_piecewise(const PiecewiseCurve<M>& curve, const PointId& x, ConditionReport& total_law,
                     ConditionReport& monotone) {
  using traits = mass_traits<M>;
  M segment_start = traits::zero();
  for (std::size_t i = 0; i < curve.breakpoints.size(); ++i) {
    const M length = M(curve.breakpoints[i] - segment_start);
    if (total_law.pass && !traits::eq(curve.directions[i].total(), traits::one())) {
      total_law.pass = false;
      total_law.witness = OrderedJson{{"x", point_to_string(x)},
                                      {"segment", i},
                                      {"direction-total", mass_to_json(curve.directions[i].total())}};
    }
    if (total_law.pass && !traits::eq(curve.increments[i].total(), length)) {
      total_law.pass = false;
      total_law.witness = OrderedJson{{"x", point_to_string(x)},
                                      {"breakpoint", mass_to_json(curve.breakpoints[i])},
                                      {"increment-total", mass_to_json(curve.increments[i].total())},
                                      {"expected", mass_to_json(length)}};
    }
    if (monotone.pass && curve.increments[i] != scale(length, curve.directions[i])) {
      monotone.pass = false;
      monotone.witness = OrderedJson{{"x", point_to_string(x)},
                                     {"breakpoint", mass_to_json(curve.breakpoints[i])},
                                     {"reason", "increment does not match the segment ramp"}};
    }
    segment_start = curve.breakpoints[i];
  }
}

}  // namespace detail

/// Checks the three family conditions over a finite window. Failures come
/// back as witnesses in the report, not as errors.
template <class M>
VerificationReport verify_family(const AllocationFamily<M>& family,
                                 const std::vector<PointId>& window, const std::vector<M>& t_grid,
                                 const M& epsilon) {
  using traits = mass_traits<M>;
  if (window.empty()) throw std::invalid_argument("verification window must be nonempty");
  std::vector<M> grid = t_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || !(traits::zero() < grid.front()) || !traits::eq(grid.back(), traits::one())) {
    throw std::invalid_argument("t grid must lie in (0,1] and contain 1");
  }

  VerificationReport report;
  report.window = window;
  std::sort(report.window.begin(), report.window.end());
  report.window.erase(std::unique(report.window.begin(), report.window.end()), report.window.end());

  // (a) pairwise disjoint top supports.
  std::vector<std::vector<PointId>> tops;
  tops.reserve(report.window.size());
  for (const auto& x : report.window) {
    tops.push_back(curve_at(family.curve_for(x), traits::one(), epsilon).measure.support());
  }
  for (std::size_t i = 0; report.disjoint_top_supports.pass && i < tops.size(); ++i) {
    for (std::size_t j = i + 1; j < tops.size(); ++j) {
      std::vector<PointId> shared;
      std::set_intersection(tops[i].begin(), tops[i].end(), tops[j].begin(), tops[j].end(),
                            std::back_inserter(shared));
      if (!shared.empty()) {
        report.disjoint_top_supports.pass = false;
        report.disjoint_top_supports.witness =
            OrderedJson{{"x", point_to_string(report.window[i])},
                        {"y", point_to_string(report.window[j])},
                        {"shared-point", point_to_string(shared.front())}};
        break;
      }
    }
  }

  // (b) and (c), exactly where the curve kind allows it.
  for (const auto& x : report.window) {
    const AllocationCurve<M> curve = family.curve_for(x);
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, DiracCurve> || std::is_same_v<T, DyadicPrimeCurve>) {
            // Ramp of a point mass / halving series: both laws hold for all t.
          } else if constexpr (std::is_same_v<T, TwoPointSplitCurve<M>>) {
            if (!c.gauge.exactly_checkable()) {
              detail::check_on_grid(curve, x, grid, epsilon, report.total_law, report.monotone);
            }
          } else if constexpr (std::is_same_v<T, PiecewiseCurve<M>>) {
            detail::check_piecewise(c, x, report.total_law, report.monotone);
          } else {
            static_assert(std::is_same_v<T, BlackBoxCurve<M>>);
            detail::check_on_grid(curve, x, grid, epsilon, report.total_law, report.monotone);
          }
        },
        curve.repr());
  }
  return report;
}

}  // namespace dwass
